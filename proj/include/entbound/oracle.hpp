#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "locc.hpp"
#include "measures.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "qstate.hpp"
#include "rng.hpp"

namespace entbound {

struct OracleConfig {
  int grid_resolution = 60;
  int refine_rounds = 3;
  double tolerance = 1e-6;

  void validate() const {
    if (grid_resolution < 4) throw ParameterError("oracle grid resolution must be >= 4");
    if (refine_rounds < 0) throw ParameterError("refine_rounds must be >= 0");
    if (!(tolerance > 0)) throw ParameterError("oracle tolerance must be positive");
  }
};

namespace detail {

// point s*(a, b, 1-a-b) on the octahedron face with sign pattern `face`
inline CorrelationTriple face_point(int face, double a, double b) {
  const std::array<double, 3> w{a, b, std::max(0.0, 1.0 - a - b)};
  std::array<double, 3> v{};
  for (int j = 0; j < 3; ++j) v[j] = (face & (1 << j)) ? -w[j] : w[j];
  return CorrelationTriple(v[0], v[1], v[2]);
}

struct FacePoint {
  int face = 0;
  double a = 0.0;
  double b = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

}  // namespace detail

// Minimum of D(state, s) over separable M3N states s (the unit octahedron),
// searched on its 8 faces with a barycentric grid and shrinking local grids.
inline double brute_min_over_octahedron(const M3NState& state, DistanceKind d, const OracleConfig& cfg = {}) {
  cfg.validate();
  if (state.n > 5) throw CapacityError("octahedron oracle supports n <= 5");
  if (state.n < 2) throw ParameterError("octahedron oracle needs n >= 2");
  if (state.c.abs_sum() <= 1.0 + kSeparableTol) return 0.0;
  const int n = state.n;
  const DistanceEvaluator eval(m3n_matrix(n, state.c), d);
  auto value = [&](int face, double a, double b) { return eval(m3n_matrix(n, detail::face_point(face, a, b))); };

  const int r = cfg.grid_resolution;
  std::vector<detail::FacePoint> pts;
  for (int face = 0; face < 8; ++face)
    for (int i = 0; i <= r; ++i)
      for (int j = 0; i + j <= r; ++j) pts.push_back({face, double(i) / r, double(j) / r});
  parallel_for(pts.size(), [&](std::size_t k) { pts[k].value = value(pts[k].face, pts[k].a, pts[k].b); });

  const std::size_t keep = std::min<std::size_t>(3, pts.size());
  std::partial_sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(keep), pts.end(),
                    [](const auto& x, const auto& y) { return x.value < y.value; });

  double best = pts.front().value;
  for (std::size_t k = 0; k < keep; ++k) {
    detail::FacePoint inc = pts[k];
    double spacing = 1.0 / r;
    for (int round = 0; round < cfg.refine_rounds; ++round) {
      spacing /= 4;
      std::vector<detail::FacePoint> local;
      for (int i = -8; i <= 8; ++i)
        for (int j = -8; j <= 8; ++j) {
          const double a = inc.a + i * spacing, b = inc.b + j * spacing;
          if (a < -1e-15 || b < -1e-15 || a + b > 1 + 1e-15) continue;
          local.push_back({inc.face, std::max(a, 0.0), std::max(b, 0.0)});
        }
      parallel_for(local.size(), [&](std::size_t m) { local[m].value = value(local[m].face, local[m].a, local[m].b); });
      for (const auto& p : local)
        if (p.value < inc.value) inc = p;
    }
    best = std::min(best, inc.value);
  }
  return best;
}

namespace detail {

// Euclidean projection onto {q >= 0, sum q = 1, q <= cap}
inline std::vector<double> project_capped_simplex(const std::vector<double>& x, double cap) {
  auto total = [&](double tau) {
    double s = 0.0;
    for (double v : x) s += std::clamp(v - tau, 0.0, cap);
    return s;
  };
  double lo = *std::min_element(x.begin(), x.end()) - cap - 1.0;
  double hi = *std::max_element(x.begin(), x.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> q(x.size());
  const double tau = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < x.size(); ++i) q[i] = std::clamp(x[i] - tau, 0.0, cap);
  double s = std::accumulate(q.begin(), q.end(), 0.0);
  for (double& v : q) v /= s;
  return q;
}

// smooth surrogate of classical_distance and its gradient in q; eps smooths
// the trace distance kink and keeps sqrt/log away from q = 0
inline double surrogate(const std::vector<double>& p, const std::vector<double>& q, DistanceKind d, double eps,
                        std::vector<double>& grad) {
  const std::size_t m = p.size();
  grad.assign(m, 0.0);
  switch (d) {
    case DistanceKind::RelativeEntropy: {
      double r = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (p[i] <= 0) continue;
        const double qi = std::max(q[i], eps);
        r += p[i] * std::log2(p[i] / qi);
        grad[i] = -p[i] / (qi * std::log(2.0));
      }
      return r;
    }
    case DistanceKind::Trace: {
      double r = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double t = std::sqrt((p[i] - q[i]) * (p[i] - q[i]) + eps * eps);
        r += 0.5 * t;
        grad[i] = 0.5 * (q[i] - p[i]) / t;
      }
      return r;
    }
    default: {
      double bc = 0.0;
      std::vector<double> dbc(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double qi = std::max(q[i], eps);
        bc += std::sqrt(p[i] * qi);
        dbc[i] = 0.5 * std::sqrt(p[i] / qi);
      }
      const double scale = d == DistanceKind::Infidelity ? -2 * bc : -2.0;
      for (std::size_t i = 0; i < m; ++i) grad[i] = scale * dbc[i];
      return d == DistanceKind::Infidelity ? 1 - bc * bc : 2 * (1 - bc);
    }
  }
}

inline std::vector<double> projected_descent(const std::vector<double>& p, std::vector<double> q, DistanceKind d,
                                             double eps, int iterations) {
  std::vector<double> g, trial_g;
  double f = surrogate(p, q, d, eps, g);
  double step = 0.1;
  for (int it = 0; it < iterations; ++it) {
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<double> x(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) x[i] = q[i] - step * g[i];
      auto trial = project_capped_simplex(x, 0.5);
      const double ft = surrogate(p, trial, d, eps, trial_g);
      if (ft < f - 1e-16) {
        q = std::move(trial);
        f = ft;
        g = trial_g;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return q;
}

}  // namespace detail

// Minimum of the classical distance from p to GHZ-diagonal spectra with every
// weight <= 1/2 (the biseparable GHZ-diagonal set).
inline double brute_min_biseparable_ghz(const GHZDiagonalState& state, DistanceKind d, const OracleConfig& cfg = {},
                                        std::uint64_t seed = 0) {
  cfg.validate();
  if (state.n > 6) throw CapacityError("biseparable GHZ oracle supports n <= 6");
  const std::vector<double>& p = state.p;
  const std::size_t m = p.size();
  if (m < 2) throw ParameterError("biseparable GHZ oracle needs n >= 1 with two weights");

  std::vector<std::vector<double>> starts;
  {
    // analytic candidate: cap the largest weight at 1/2 and rescale the rest
    std::vector<double> q = p;
    const std::size_t k = state.argmax();
    if (p[k] > 0.5) {
      const double rest = 1.0 - p[k];
      for (std::size_t i = 0; i < m; ++i)
        q[i] = i == k ? 0.5 : (rest > 0 ? p[i] * 0.5 / rest : 0.5 / static_cast<double>(m - 1));
    }
    starts.push_back(detail::project_capped_simplex(q, 0.5));
  }
  starts.push_back(std::vector<double>(m, 1.0 / static_cast<double>(m)));
  starts.push_back(detail::project_capped_simplex(p, 0.5));
  CounterRng rng(seed, 0x6768);
  for (int r = 0; r < 5; ++r) {
    std::vector<double> x(m);
    for (double& v : x) v = -std::log(std::max(rng.uniform(), 1e-300));
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    for (double& v : x) v /= s;
    starts.push_back(detail::project_capped_simplex(x, 0.5));
  }

  std::vector<double> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    std::vector<double> q = starts[i];
    for (double eps : {1e-3, 1e-5, 1e-7, 1e-9}) q = detail::projected_descent(p, q, d, eps, 4000);
    results[i] = std::min(classical_distance(p, q, d), classical_distance(p, starts[i], d));
  });
  return *std::min_element(results.begin(), results.end());
}

namespace detail {

inline Matrix single_qubit_power(const Matrix2& u, int copies) {
  Matrix out = Matrix::Identity(1, 1);
  for (int i = 0; i < copies; ++i) out = kron(out, Matrix(u));
  return out;
}

inline void require_even(int n, const char* what) {
  if (n < 2 || n % 2 != 0) throw ParameterError(std::string(what) + " needs even n >= 2");
}

}  // namespace detail

// U1 = S2^N S1^N F and U2 = S1^N F S2^N with S_k = (I + i sigma_k)/sqrt2 and
// F = sigma1^(n/2+1) (x) I^(n/2-1)
inline std::array<Matrix, 2> lambda_unitaries(int n) {
  detail::require_even(n, "Lambda_{p,q}");
  require_dense(n);
  const Matrix2 id = Matrix2::Identity();
  const Matrix2 s1 = (id + cplx(0, 1) * pauli_matrix(1)) / std::sqrt(2.0);
  const Matrix2 s2 = (id + cplx(0, 1) * pauli_matrix(2)) / std::sqrt(2.0);
  const Matrix f = kron(detail::single_qubit_power(pauli_matrix(1), n / 2 + 1), detail::single_qubit_power(id, n / 2 - 1));
  const Matrix s1n = detail::single_qubit_power(s1, n), s2n = detail::single_qubit_power(s2, n);
  return {s2n * s1n * f, s1n * f * s2n};
}

inline DenseState apply_lambda_pq(const DenseState& state, double p, double q) {
  detail::require_even(state.n, "Lambda_{p,q}");
  if (p < 0 || q < 0 || p + q > 1 + 1e-12) throw ParameterError("Lambda_{p,q} needs p, q >= 0 and p + q <= 1");
  const auto u = lambda_unitaries(state.n);
  Matrix out = p * state.rho + q * (u[0] * state.rho * u[0].adjoint()) +
               (1 - p - q) * (u[1] * state.rho * u[1].adjoint());
  return DenseState{state.n, 0.5 * (out + out.adjoint())};
}

inline DenseState corner_state(int n, double p, double q, double h) {
  return m3n_density(M3NState{n, canonical_corner_triple(n, p, q, h)});
}

inline double check_translation_invariance(double h, const std::vector<std::pair<double, double>>& pairs,
                                           DistanceKind d, int n) {
  if (n != 2 && n != 4) throw ParameterError("translation invariance check runs at n = 2 or 4");
  if (h < 0 || h >= 1) throw ParameterError("translation invariance check needs h in [0, 1)");
  auto dist = [&](double p, double q) { return matrix_distance(corner_state(n, p, q, h), corner_state(n, p, q, 0), d); };
  const double ref = dist(1.0 / 3, 1.0 / 3);
  double dev = 0.0;
  for (const auto& [p, q] : pairs) {
    if (p < 0 || q < 0 || p + q > 1 + 1e-12) throw ParameterError("(p, q) outside the triangle");
    const double v = dist(p, q);
    dev = std::max(dev, v == ref ? 0.0 : std::abs(v - ref));
  }
  return dev;
}

// Kraus list |Psi_j+><Phi_j+|, |Psi_j+><Phi_j-|, |Psi_j+><Psi_j+|, |Psi_j-><Psi_j-|
// where Phi_j / Psi_j run over GHZ vectors with even / odd popcount of i
inline std::vector<Matrix> omega_kraus(int n) {
  detail::require_even(n, "Omega");
  if (n > 6) throw CapacityError("Omega is built for n <= 6");
  std::vector<std::uint64_t> even, odd;
  for (std::uint64_t i = 0; i < dim_of(n) / 2; ++i) (std::popcount(i) % 2 == 0 ? even : odd).push_back(i);
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < even.size(); ++j) {
    const Vector phip = ghz_basis_vector({even[j], true}, n), phim = ghz_basis_vector({even[j], false}, n);
    const Vector psip = ghz_basis_vector({odd[j], true}, n), psim = ghz_basis_vector({odd[j], false}, n);
    out.push_back(psip * phip.adjoint());
    out.push_back(psip * phim.adjoint());
    out.push_back(psip * psip.adjoint());
    out.push_back(psim * psim.adjoint());
  }
  return out;
}

inline double omega_completeness_error(int n) {
  const auto k = omega_kraus(n);
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(dim_of(n)), static_cast<Eigen::Index>(dim_of(n)));
  for (const auto& a : k) s += a.adjoint() * a;
  return (s - Matrix::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

inline DenseState apply_omega(const DenseState& state) {
  const auto k = omega_kraus(state.n);
  Matrix out = Matrix::Zero(state.rho.rows(), state.rho.cols());
  for (const auto& a : k) out += a * state.rho * a.adjoint();
  return DenseState{state.n, 0.5 * (out + out.adjoint())};
}

// Upper estimate of the distance from `state` to the fully separable set,
// minimising over mixtures of `components` product pure states.
inline double separable_distance_upper(const DenseState& state, DistanceKind d, int components = 0, int restarts = 4,
                                       std::uint64_t seed = 0) {
  require_dense(state.n);
  const int n = state.n;
  if (n > 4) throw CapacityError("product-mixture search supports n <= 4");
  if (components <= 0) components = static_cast<int>(dim_of(n));
  const DistanceEvaluator eval(state.rho, d);
  const int per = 2 * n + 1;
  auto build = [&](const std::vector<double>& x) {
    std::vector<double> w(static_cast<std::size_t>(components));
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < components; ++k) mx = std::max(mx, x[static_cast<std::size_t>(k * per)]);
    double total = 0.0;
    for (int k = 0; k < components; ++k) total += w[static_cast<std::size_t>(k)] = std::exp(x[static_cast<std::size_t>(k * per)] - mx);
    Matrix rho = Matrix::Zero(state.rho.rows(), state.rho.cols());
    for (int k = 0; k < components; ++k) {
      Vector v = Vector::Ones(1);
      for (int q = 0; q < n; ++q) {
        const double th = x[static_cast<std::size_t>(k * per + 1 + 2 * q)];
        const double ph = x[static_cast<std::size_t>(k * per + 2 + 2 * q)];
        Vector s(2);
        s << std::cos(th / 2), std::polar(1.0, ph) * std::sin(th / 2);
        Vector t(v.size() * 2);
        for (Eigen::Index a = 0; a < v.size(); ++a) t.segment(2 * a, 2) = v[a] * s;
        v = t;
      }
      rho += (w[static_cast<std::size_t>(k)] / total) * v * v.adjoint();
    }
    return rho;
  };
  auto f = [&](const std::vector<double>& x) {
    const double v = eval(build(x));
    return std::isfinite(v) ? v : 1e6;
  };
  std::vector<double> results(static_cast<std::size_t>(restarts));
  parallel_for(results.size(), [&](std::size_t r) {
    CounterRng rng(seed, r);
    std::vector<double> x(static_cast<std::size_t>(components * per));
    for (int k = 0; k < components; ++k) {
      x[static_cast<std::size_t>(k * per)] = 0.0;
      for (int q = 0; q < n; ++q) {
        x[static_cast<std::size_t>(k * per + 1 + 2 * q)] = std::acos(1 - 2 * rng.uniform());
        x[static_cast<std::size_t>(k * per + 2 + 2 * q)] = 2 * kPi * rng.uniform();
      }
    }
    double best = f(x);
    for (int round = 0; round < 6; ++round) {
      auto res = nelder_mead(f, x, round == 0 ? 0.5 : 0.1, 1e-12, 4000);
      if (res.value >= best - 1e-10) {
        best = std::min(best, res.value);
        break;
      }
      best = res.value;
      x = res.x;
    }
    results[r] = best;
  });
  return *std::min_element(results.begin(), results.end());
}

}  // namespace entbound
