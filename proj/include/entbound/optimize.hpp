#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "locc.hpp"
#include "parallel.hpp"
#include "pauli.hpp"
#include "qstate.hpp"
#include "rng.hpp"

namespace entbound {

struct OptimisationOptions {
  enum class Mode { SharedAngles, PerQubit };

  Mode mode = Mode::SharedAngles;
  int restarts = 32;
  int grid_density = 12;
  double refine_tolerance = 1e-8;
  int max_iterations = 500;
  std::uint64_t seed = 0;

  void validate() const {
    if (restarts < 1) throw ParameterError("restarts must be >= 1");
    if (grid_density < 2) throw ParameterError("grid density must be >= 2");
    if (max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
    if (!(refine_tolerance > 0)) throw ParameterError("refine tolerance must be positive");
  }
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

// Minimises f from x0 with an axis-aligned initial simplex of size `step`.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, double step, double tol, int max_iter) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> pts(d + 1, x0);
  std::vector<double> vals(d + 1);
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
  for (std::size_t i = 0; i <= d; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(d + 1);
  auto combine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = c[i] + t * (w[i] - c[i]);
    return r;
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
    if (vals[worst] - vals[best] <= tol) {
      double size = 0.0;
      for (std::size_t i = 0; i <= d; ++i)
        for (std::size_t k = 0; k < d; ++k) size = std::max(size, std::abs(pts[i][k] - pts[best][k]));
      if (size <= 1e3 * tol || vals[worst] - vals[best] <= 0.0) break;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k] / static_cast<double>(d);

    auto xr = combine(centroid, pts[worst], -1.0);
    const double fr = f(xr);
    if (fr < vals[best]) {
      auto xe = combine(centroid, pts[worst], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    auto xc = combine(centroid, outside ? xr : pts[worst], 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      pts[i] = combine(pts[best], pts[i], 0.5);
      vals[i] = f(pts[i]);
    }
  }
  std::size_t best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], it};
}

struct TripleOptimum {
  LocalRotation rotation;
  CorrelationTriple triple;
  double objective = 0.0;
};

struct OverlapOptimum {
  LocalRotation rotation;
  GHZBasisIndex index;
  double p_max = 0.0;
};

namespace detail {

inline double triple_objective(const std::array<double, 3>& c) {
  return std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]);
}

inline std::vector<Angles> shared_grid(int g) {
  std::vector<Angles> out;
  out.reserve(static_cast<std::size_t>(g) * g * g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      for (int k = 0; k < g; ++k) out.push_back({kPi * i / (g - 1), 2 * kPi * j / g, 2 * kPi * k / g});
  return out;
}

inline Angles random_angles(CounterRng& rng) {
  return {std::acos(1 - 2 * rng.uniform()), 2 * kPi * rng.uniform(), 2 * kPi * rng.uniform()};
}

// argmax over SO(3) of sum_j |O_j . V_j| (rows of V)
inline Rot3 best_alignment(const Rot3& v) {
  Rot3 best = Rot3::Identity();
  double best_val = -1.0;
  for (int mask = 0; mask < 8; ++mask) {
    Rot3 m = v;
    for (int j = 0; j < 3; ++j)
      if (mask & (1 << j)) m.row(j) *= -1.0;
    Eigen::JacobiSVD<Rot3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Rot3 dmat = Rot3::Identity();
    dmat(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
    Rot3 o = svd.matrixU() * dmat * svd.matrixV().transpose();
    const double val = (o.cwiseProduct(m)).sum();
    if (val > best_val + 1e-15) {
      best_val = val;
      best = o;
    }
  }
  return best;
}

// Runs `count` independent maximisations and keeps the best (lowest index on ties).
template <class Result, class Run>
Result best_of(std::size_t count, Run&& run, double Result::*score) {
  std::vector<Result> results(count);
  parallel_for(count, [&](std::size_t i) { results[i] = run(i); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i)
    if (results[i].*score > results[best].*score) best = i;
  return results[best];
}

inline std::vector<std::size_t> top_indices(const std::vector<double>& vals, std::size_t k) {
  std::vector<std::size_t> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return vals[a] > vals[b] || (vals[a] == vals[b] && a < b); });
  idx.resize(k);
  return idx;
}

struct AngleSearch {
  std::vector<double> x;
  double value = -1.0;
};

// shared-angle maximisation: grid, then simplex refinement from identity and
// the best grid points
template <class Objective>
AngleSearch maximise_shared(Objective&& obj, const OptimisationOptions& opts) {
  auto grid = shared_grid(opts.grid_density);
  std::vector<double> vals(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { vals[i] = obj(grid[i]); });
  std::vector<Angles> starts = {Angles{}};
  for (std::size_t i : top_indices(vals, static_cast<std::size_t>(opts.restarts - 1))) starts.push_back(grid[i]);
  const double step = 2 * kPi / opts.grid_density;
  return best_of<AngleSearch>(
      starts.size(),
      [&](std::size_t i) {
        auto f = [&](const std::vector<double>& x) { return -obj(Angles{x[0], x[1], x[2]}); };
        const Angles& a = starts[i];
        auto r = nelder_mead(f, {a.theta, a.psi, a.phi}, step, opts.refine_tolerance, opts.max_iterations);
        AngleSearch s{r.x, -r.value};
        const double at_start = obj(a);
        if (at_start >= s.value) s = AngleSearch{{a.theta, a.psi, a.phi}, at_start};
        return s;
      },
      &AngleSearch::value);
}

inline std::vector<Angles> unpack(const std::vector<double>& x) {
  std::vector<Angles> out;
  for (std::size_t i = 0; i + 2 < x.size(); i += 3) out.push_back({x[i], x[i + 1], x[i + 2]});
  return out;
}

inline std::vector<double> pack(const std::vector<Angles>& as) {
  std::vector<double> x;
  for (const auto& a : as) x.insert(x.end(), {a.theta, a.psi, a.phi});
  return x;
}

}  // namespace detail

inline TripleOptimum optimise_triple(const CorrelationTensor& tensor, const OptimisationOptions& opts = {}) {
  opts.validate();
  const int n = tensor.n();
  const std::vector<double> block = tensor.block3();

  if (opts.mode == OptimisationOptions::Mode::SharedAngles) {
    if (n <= 4 && !tensor.is_symmetric(1e-9))
      throw ParameterError("shared-angle mode needs a permutation-symmetric tensor; use per-qubit mode");
    auto obj = [&](const Angles& a) {
      return detail::triple_objective(contract_triple(block, n, std::vector<Rot3>(static_cast<std::size_t>(n),
                                                                                  so3_from_angles(a))));
    };
    auto best = detail::maximise_shared(obj, opts);
    auto rot = LocalRotation::shared_rotation({best.x[0], best.x[1], best.x[2]});
    TripleOptimum out{rot, rotated_triple(tensor, rot), 0.0};
    out.objective = out.triple.abs_sum();
    return out;
  }

  struct Run {
    std::vector<Rot3> os;
    double value = -1.0;
  };
  auto objective = [&](const std::vector<Rot3>& os) { return detail::triple_objective(contract_triple(block, n, os)); };
  auto run = [&](std::size_t r) {
    std::vector<Rot3> os(static_cast<std::size_t>(n), Rot3::Identity());
    if (r > 0) {
      CounterRng rng(opts.seed, r);
      for (auto& o : os) o = so3_from_angles(detail::random_angles(rng));
    }
    double value = objective(os);
    for (int sweep = 0; sweep < opts.max_iterations; ++sweep) {
      for (int k = 0; k < n; ++k)
        os[static_cast<std::size_t>(k)] = detail::best_alignment(contract_all_but(block, n, os, k));
      const double next = objective(os);
      const bool done = next - value < opts.refine_tolerance;
      value = std::max(value, next);
      if (done) break;
    }
    return Run{os, value};
  };
  Run best = detail::best_of<Run>(static_cast<std::size_t>(opts.restarts), run, &Run::value);

  std::vector<Angles> angles;
  for (const auto& o : best.os) angles.push_back(angles_from_so3(o));
  auto f = [&](const std::vector<double>& x) {
    std::vector<Rot3> os;
    for (const auto& a : detail::unpack(x)) os.push_back(so3_from_angles(a));
    return -objective(os);
  };
  auto polish = nelder_mead(f, detail::pack(angles), 0.05, opts.refine_tolerance, opts.max_iterations);
  if (-polish.value > objective(LocalRotation::per_qubit_rotation(angles).matrices(n))) angles = detail::unpack(polish.x);

  auto rot = LocalRotation::per_qubit_rotation(angles);
  TripleOptimum out{rot, rotated_triple(tensor, rot), 0.0};
  out.objective = out.triple.abs_sum();
  return out;
}

namespace detail {

// <beta| U rho U^dagger |beta> with U the tensor product of per-qubit SU(2)
inline double rotated_overlap(const DenseState& state, const Vector& beta, const std::vector<Angles>& as, bool shared) {
  Vector w = beta;
  for (int q = 0; q < state.n; ++q) {
    const Angles& a = shared ? as.front() : as[static_cast<std::size_t>(q)];
    apply_vector(w, state.n, q, su2_from_angles(a).adjoint());
  }
  return (w.adjoint() * state.rho * w)(0, 0).real();
}

}  // namespace detail

inline OverlapOptimum optimise_ghz_overlap(const DenseState& state, const OptimisationOptions& opts = {},
                                           std::size_t candidates = 4) {
  opts.validate();
  require_dense(state.n);
  const int n = state.n;
  const GHZDiagonalState diag = ghz_diagonalise(state);
  const auto cand = detail::top_indices(diag.p, std::max<std::size_t>(candidates, 1));

  OverlapOptimum best;
  best.p_max = -1.0;
  for (std::size_t ci = 0; ci < cand.size(); ++ci) {
    const GHZBasisIndex idx = GHZBasisIndex::from_flat(cand[ci]);
    const Vector beta = ghz_basis_vector(idx, n);
    OverlapOptimum local;
    if (opts.mode == OptimisationOptions::Mode::SharedAngles) {
      auto obj = [&](const Angles& a) { return detail::rotated_overlap(state, beta, {a}, true); };
      auto r = detail::maximise_shared(obj, opts);
      local = {LocalRotation::shared_rotation({r.x[0], r.x[1], r.x[2]}), idx, r.value};
    } else {
      auto run = [&](std::size_t r) {
        std::vector<Angles> start(static_cast<std::size_t>(n));
        if (r > 0) {
          CounterRng rng(opts.seed, 1000 * ci + r);
          for (auto& a : start) a = detail::random_angles(rng);
        }
        auto f = [&](const std::vector<double>& x) {
          return -detail::rotated_overlap(state, beta, detail::unpack(x), false);
        };
        auto res = nelder_mead(f, detail::pack(start), 0.3, opts.refine_tolerance, opts.max_iterations * 3 * n);
        const double at_start = detail::rotated_overlap(state, beta, start, false);
        if (at_start >= -res.value) return detail::AngleSearch{detail::pack(start), at_start};
        return detail::AngleSearch{res.x, -res.value};
      };
      auto r = detail::best_of<detail::AngleSearch>(static_cast<std::size_t>(opts.restarts), run,
                                                    &detail::AngleSearch::value);
      local = {LocalRotation::per_qubit_rotation(detail::unpack(r.x)), idx, r.value};
    }
    if (local.p_max > best.p_max) best = local;
  }
  // report the overlap at the normalised rotation actually returned
  std::vector<Angles> as;
  for (int q = 0; q < (best.rotation.shared ? 1 : n); ++q) as.push_back(best.rotation.angles_for(q));
  best.p_max = detail::rotated_overlap(state, ghz_basis_vector(best.index, n), as, best.rotation.shared);
  return best;
}

}  // namespace entbound
