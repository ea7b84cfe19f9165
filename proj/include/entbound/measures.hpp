#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "locc.hpp"
#include "qstate.hpp"

namespace entbound {

enum class DistanceKind { RelativeEntropy, Trace, Infidelity, SquaredBures, SquaredHellinger };

inline constexpr std::array<DistanceKind, 5> kAllDistances = {
    DistanceKind::RelativeEntropy, DistanceKind::Trace, DistanceKind::Infidelity, DistanceKind::SquaredBures,
    DistanceKind::SquaredHellinger};

inline std::string to_string(DistanceKind d) {
  switch (d) {
    case DistanceKind::RelativeEntropy: return "relative_entropy";
    case DistanceKind::Trace: return "trace";
    case DistanceKind::Infidelity: return "infidelity";
    case DistanceKind::SquaredBures: return "bures";
    case DistanceKind::SquaredHellinger: return "hellinger";
  }
  return "?";
}

inline DistanceKind parse_distance(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "relative_entropy" || s == "re") return DistanceKind::RelativeEntropy;
  if (s == "trace" || s == "tr") return DistanceKind::Trace;
  if (s == "infidelity" || s == "fidelity" || s == "f") return DistanceKind::Infidelity;
  if (s == "bures" || s == "squared_bures" || s == "b") return DistanceKind::SquaredBures;
  if (s == "hellinger" || s == "squared_hellinger" || s == "h") return DistanceKind::SquaredHellinger;
  throw ParameterError("unknown distance '" + s + "'");
}

// Either "at most M parts" (partition-independent) or a fixed partition {K_a}.
struct SeparabilityLevel {
  int M = 2;
  std::vector<int> partition;

  static SeparabilityLevel parts(int m) { return SeparabilityLevel{m, {}}; }
  static SeparabilityLevel with_partition(std::vector<int> ks) {
    SeparabilityLevel l;
    l.M = static_cast<int>(ks.size());
    l.partition = std::move(ks);
    return l;
  }

  bool partition_dependent() const { return !partition.empty(); }

  void validate(int n) const {
    if (partition_dependent()) {
      if (partition.size() < 2) throw ParameterError("partition needs at least two parts");
      for (int k : partition)
        if (k < 1) throw ParameterError("partition parts must be >= 1");
      if (std::accumulate(partition.begin(), partition.end(), 0) != n)
        throw ParameterError("partition parts must sum to n=" + std::to_string(n));
    } else if (M < 2 || M > n) {
      throw ParameterError("separability level M must lie in [2, n]");
    }
  }

  // whether the level's separable M3N set is the octahedron (otherwise it is
  // every physical M3N state)
  bool nontrivial(int n) const {
    if (partition_dependent()) {
      int odd = 0;
      for (int k : partition) odd += k % 2;
      return odd > 1;
    }
    return M > (n + 1) / 2;
  }
};

enum class ReportKind { Exact, LowerBound };

inline std::string to_string(ReportKind k) { return k == ReportKind::Exact ? "exact" : "lower_bound"; }

struct EntanglementReport {
  double value = 0.0;
  DistanceKind distance = DistanceKind::Trace;
  SeparabilityLevel level;
  ReportKind kind = ReportKind::Exact;
  std::optional<double> uncertainty;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<double> clipped_fraction;
};

inline constexpr double kSeparableTol = 1e-12;

inline double h_value(const CorrelationTriple& c) { return 0.5 * (c.abs_sum() - 1.0); }

namespace detail {
inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }
inline double check_h(double h) {
  if (!(h > 0.0) || h > 1.0 + 1e-12) throw DomainError("f_D needs h in (0, 1]");
  return std::min(h, 1.0);
}
inline double check_p(double p) {
  if (!(p > 0.5) || p > 1.0 + 1e-12) throw DomainError("g_D needs p_max in (1/2, 1]");
  return std::min(p, 1.0);
}
}  // namespace detail

// closed forms for even-n M3N states
inline double f_D(double h, DistanceKind d) {
  h = detail::check_h(h);
  switch (d) {
    case DistanceKind::RelativeEntropy: return 0.5 * (detail::xlog2x(1 - h) + detail::xlog2x(1 + h));
    case DistanceKind::Trace: return 0.5 * h;
    case DistanceKind::Infidelity: return 0.5 * (1 - std::sqrt(std::max(0.0, 1 - h * h)));
    case DistanceKind::SquaredBures:
    case DistanceKind::SquaredHellinger: return 2 - std::sqrt(1 - h) - std::sqrt(1 + h);
  }
  return 0.0;
}

inline double f_D_derivative(double h, DistanceKind d) {
  h = detail::check_h(h);
  switch (d) {
    case DistanceKind::RelativeEntropy:
      return h >= 1.0 ? std::numeric_limits<double>::infinity() : 0.5 * std::log2((1 + h) / (1 - h));
    case DistanceKind::Trace: return 0.5;
    case DistanceKind::Infidelity:
      return h >= 1.0 ? std::numeric_limits<double>::infinity() : 0.5 * h / std::sqrt(1 - h * h);
    case DistanceKind::SquaredBures:
    case DistanceKind::SquaredHellinger:
      return h >= 1.0 ? std::numeric_limits<double>::infinity()
                      : 0.5 / std::sqrt(1 - h) - 0.5 / std::sqrt(1 + h);
  }
  return 0.0;
}

// closed forms for GHZ-diagonal states
inline double g_D(double p, DistanceKind d) {
  p = detail::check_p(p);
  switch (d) {
    case DistanceKind::RelativeEntropy: return 1 + detail::xlog2x(p) + detail::xlog2x(1 - p);
    case DistanceKind::Trace: return p - 0.5;
    case DistanceKind::Infidelity: return 0.5 - std::sqrt(p * (1 - p));
    case DistanceKind::SquaredBures:
    case DistanceKind::SquaredHellinger: return 2 - std::sqrt(2.0) * (std::sqrt(p) + std::sqrt(1 - p));
  }
  return 0.0;
}

inline double g_D_derivative(double p, DistanceKind d) {
  p = detail::check_p(p);
  const double inf = std::numeric_limits<double>::infinity();
  switch (d) {
    case DistanceKind::RelativeEntropy: return p >= 1.0 ? inf : std::log2(p / (1 - p));
    case DistanceKind::Trace: return 1.0;
    case DistanceKind::Infidelity: return p >= 1.0 ? inf : (2 * p - 1) / (2 * std::sqrt(p * (1 - p)));
    case DistanceKind::SquaredBures:
    case DistanceKind::SquaredHellinger:
      return p >= 1.0 ? inf : std::sqrt(2.0) * (0.5 / std::sqrt(1 - p) - 0.5 / std::sqrt(p));
  }
  return 0.0;
}

enum class OddBranch { Zero, Face, Edge };

struct OddTraceResult {
  double value = 0.0;
  OddBranch branch = OddBranch::Zero;
  int edge = -1;  // component set to zero on the edge branch
};

// three-branch trace formula for odd n (no validity checks)
inline OddTraceResult odd_trace_formula(const CorrelationTriple& c) {
  const double h = h_value(c);
  if (h <= kSeparableTol) return {};
  bool face = true;
  for (int j = 0; j < 3; ++j)
    if (h > 1.5 * std::abs(c[j])) face = false;
  if (face) return {h / std::sqrt(3.0), OddBranch::Face, -1};
  OddTraceResult r{std::numeric_limits<double>::infinity(), OddBranch::Edge, -1};
  for (int j = 0; j < 3; ++j) {
    const double a = std::abs(c[j]);
    const double b = 2 * h - a;
    const double v = 0.5 * std::sqrt(a * a + 0.5 * b * b);
    if (v < r.value) {
      r.value = v;
      r.edge = j;
    }
  }
  return r;
}

namespace detail {

inline double level_value(const CorrelationTriple& c, int n, const SeparabilityLevel& level, DistanceKind d) {
  if (n < 2) throw ParameterError("entanglement measures need n >= 2");
  level.validate(n);
  if (n % 2 == 1 && d != DistanceKind::Trace)
    throw UnsupportedError("odd n supports only the trace distance (got " + to_string(d) + ")");
  const double h = h_value(c);
  if (!level.nontrivial(n) || h <= kSeparableTol) return 0.0;
  if (n % 2 == 0) return f_D(h, d);
  return odd_trace_formula(c).value;
}

}  // namespace detail

inline EntanglementReport entanglement_m3n(const M3NState& state, const SeparabilityLevel& level, DistanceKind d) {
  if (!M3NState::physical(state.n, state.c)) throw ValidityError("triple outside the physical region");
  return EntanglementReport{detail::level_value(state.c, state.n, level, d), d, level, ReportKind::Exact, {}, {}, {}, {}};
}

inline EntanglementReport lower_bound_from_triple(const CorrelationTriple& c, int n, const SeparabilityLevel& level,
                                                  DistanceKind d) {
  return EntanglementReport{detail::level_value(c, n, level, d), d, level, ReportKind::LowerBound, {}, {}, {}, {}};
}

inline EntanglementReport genuine_ghz_diag(const GHZDiagonalState& state, DistanceKind d) {
  const double p = state.p_max();
  return EntanglementReport{p > 0.5 ? g_D(p, d) : 0.0, d, SeparabilityLevel::parts(2), ReportKind::Exact, {}, {}, {}, {}};
}

inline bool is_separable_m3n(const M3NState& state, const SeparabilityLevel& level) {
  level.validate(state.n);
  return !level.nontrivial(state.n) || state.c.abs_sum() <= 1.0 + kSeparableTol;
}

// Flip k in {1,2,3} is conjugation by sigma_k on one qubit: it negates the
// two components other than k. Flip 0 is the identity.
inline CorrelationTriple pauli_flip(const CorrelationTriple& c, int k) {
  std::array<double, 3> v = c.c;
  if (k != 0)
    for (int j = 0; j < 3; ++j)
      if (j != k - 1) v[static_cast<std::size_t>(j)] = -v[static_cast<std::size_t>(j)];
  return CorrelationTriple(v[0], v[1], v[2]);
}

// (p, q, h) inside the tetrahedron corner of the canonical vertex
// {-1, s, -1}; other corners are first mapped there by `flip`.
struct CornerCoordinates {
  int flip = 0;
  double p = 1.0 / 3.0;
  double q = 1.0 / 3.0;
  double h = 0.0;
};

inline CorrelationTriple canonical_corner_triple(int n, double p, double q, double h) {
  const double s = tetra_sign(n);
  const double r = 1 - p - q;
  // p V1(h) + q V2(h) + r V3(h), V1 = {-h, s h, -1}, V2 = {-h, s, -h}, V3 = {-1, s h, -h}
  return CorrelationTriple(-p * h - q * h - r, s * (p * h + q + r * h), -p - q * h - r * h);
}

inline CornerCoordinates corner_coordinates(int n, const CorrelationTriple& c) {
  if (n % 2 != 0) throw ParameterError("corner coordinates need even n");
  const double s = tetra_sign(n);
  // vertex reached from the canonical one by each flip
  const std::array<std::array<double, 3>, 4> vertices = {
      {{-1, s, -1}, {-1, -s, 1}, {1, s, 1}, {1, -s, -1}}};
  int best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const auto& v = vertices[static_cast<std::size_t>(k)];
    const double dot = v[0] * c[0] + v[1] * c[1] + v[2] * c[2];
    if (dot > best_dot + 1e-15) {
      best_dot = dot;
      best = k;
    }
  }
  CorrelationTriple t = pauli_flip(c, best);
  CornerCoordinates cc;
  cc.flip = best;
  cc.h = 0.5 * (-1 - (t[0] - s * t[1] + t[2]));
  const double den = 3 + t[0] - s * t[1] + t[2];
  if (den > 1e-12) {
    cc.p = (1 + t[0] - s * t[1] - t[2]) / den;
    cc.q = (1 + t[0] + s * t[1] + t[2]) / den;
  }
  return cc;
}

inline CorrelationTriple triple_from_corner(int n, const CornerCoordinates& cc) {
  return pauli_flip(canonical_corner_triple(n, cc.p, cc.q, cc.h), cc.flip);
}

inline M3NState closest_separable_even(const M3NState& state, const SeparabilityLevel& level) {
  if (state.n % 2 != 0) throw ParameterError("closest_separable_even needs even n");
  if (!M3NState::physical(state.n, state.c)) throw ValidityError("triple outside the physical tetrahedron");
  level.validate(state.n);
  if (!level.nontrivial(state.n)) throw AlreadySeparableError("every M3N state is separable at this level");
  const double h = h_value(state.c);
  if (h < -kSeparableTol) throw AlreadySeparableError("state lies inside the octahedron");
  if (h <= kSeparableTol) return state;
  CornerCoordinates cc = corner_coordinates(state.n, state.c);
  cc.h = 0.0;
  return M3NState{state.n, triple_from_corner(state.n, cc)};
}

inline M3NState closest_separable_odd_trace(const M3NState& state) {
  if (state.n % 2 == 0) throw ParameterError("closest_separable_odd_trace needs odd n");
  const CorrelationTriple& c = state.c;
  const double h = h_value(c);
  if (h < -kSeparableTol) throw AlreadySeparableError("state lies inside the octahedron");
  if (h <= kSeparableTol) return state;
  auto sgn = [](double v) { return v < 0 ? -1.0 : 1.0; };
  const OddTraceResult r = odd_trace_formula(c);
  const double sum = c.abs_sum();
  std::array<double, 3> s{};
  if (r.branch == OddBranch::Face) {
    for (int i = 0; i < 3; ++i) s[static_cast<std::size_t>(i)] = sgn(c[i]) * (1 - sum + 3 * std::abs(c[i])) / 3;
  } else {
    const int k = r.edge;
    const double rest = sum - std::abs(c[k]);
    for (int i = 0; i < 3; ++i)
      s[static_cast<std::size_t>(i)] = i == k ? 0.0 : sgn(c[i]) * (1 - rest + 2 * std::abs(c[i])) / 2;
  }
  return M3NState{state.n, CorrelationTriple(s[0], s[1], s[2])};
}

// Distances from a fixed state a, reusing its spectral data across many b.
class DistanceEvaluator {
 public:
  DistanceEvaluator(const Matrix& a, DistanceKind d) : a_(a), d_(d) {
    if (d == DistanceKind::RelativeEntropy) {
      auto e = eigh(a);
      for (Eigen::Index i = 0; i < e.values.size(); ++i) a_log_a_ += detail::xlog2x(clamp_eigenvalue(e.values[i]));
    } else if (d != DistanceKind::Trace) {
      sqrt_a_ = matrix_sqrt_psd(a);
    }
  }

  double operator()(const Matrix& b) const {
    if (b.rows() != a_.rows() || b.cols() != a_.cols()) throw ParameterError("distance needs equal dimensions");
    switch (d_) {
      case DistanceKind::Trace: {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a_ - b, Eigen::EigenvaluesOnly);
        return 0.5 * es.eigenvalues().cwiseAbs().sum();
      }
      case DistanceKind::RelativeEntropy: {
        auto e = eigh(b);
        double cross = 0.0;
        for (Eigen::Index j = 0; j < e.values.size(); ++j) {
          const double w = (e.vectors.col(j).adjoint() * a_ * e.vectors.col(j))(0, 0).real();
          const double mu = e.values[j];
          if (mu <= 1e-13) {
            if (w > 1e-12) return std::numeric_limits<double>::infinity();
            continue;
          }
          cross += w * std::log2(mu);
        }
        return std::max(0.0, a_log_a_ - cross);
      }
      case DistanceKind::Infidelity:
      case DistanceKind::SquaredBures: {
        Matrix m = sqrt_a_ * b * sqrt_a_;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
        double root_f = 0.0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) root_f += std::sqrt(std::max(0.0, es.eigenvalues()[i]));
        root_f = std::min(root_f, 1.0);
        return d_ == DistanceKind::Infidelity ? 1 - root_f * root_f : 2 * (1 - root_f);
      }
      case DistanceKind::SquaredHellinger: {
        const double overlap = (sqrt_a_ * matrix_sqrt_psd(b)).trace().real();
        return std::max(0.0, 2 * (1 - overlap));
      }
    }
    return 0.0;
  }

 private:
  Matrix a_;
  DistanceKind d_;
  Matrix sqrt_a_;
  double a_log_a_ = 0.0;
};

inline double matrix_distance(const DenseState& a, const DenseState& b, DistanceKind d) {
  if (a.n != b.n) throw ParameterError("distance needs states on the same number of qubits");
  return DistanceEvaluator(a.rho, d)(b.rho);
}

inline double classical_distance(const std::vector<double>& p, const std::vector<double>& q, DistanceKind d) {
  if (p.size() != q.size() || p.empty()) throw ParameterError("distributions must have equal nonzero length");
  auto check = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
      if (x < -1e-12) throw ParameterError("distribution has a negative entry");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ParameterError("distribution is not normalised");
  };
  check(p);
  check(q);
  switch (d) {
    case DistanceKind::RelativeEntropy: {
      double r = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        r += p[i] * std::log2(p[i] / q[i]);
      }
      return std::max(0.0, r);
    }
    case DistanceKind::Trace: {
      double r = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) r += std::abs(p[i] - q[i]);
      return 0.5 * r;
    }
    default: {
      double bc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) bc += std::sqrt(std::max(0.0, p[i]) * std::max(0.0, q[i]));
      bc = std::min(bc, 1.0);
      return d == DistanceKind::Infidelity ? 1 - bc * bc : 2 * (1 - bc);
    }
  }
}

}  // namespace entbound
