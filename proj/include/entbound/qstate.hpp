#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace entbound {

inline std::atomic<int>& dense_cap_storage() {
  static std::atomic<int> cap{12};
  return cap;
}
inline int dense_cap() { return dense_cap_storage().load(); }
inline void set_dense_cap(int n) {
  if (n < 1 || n > 16) throw ParameterError("dense cap must be in [1, 16]");
  dense_cap_storage().store(n);
}

inline void require_dense(int n) {
  if (n < 1) throw ParameterError("qubit count must be positive");
  if (n > dense_cap())
    throw CapacityError("n=" + std::to_string(n) + " exceeds dense cap " + std::to_string(dense_cap()));
}

// sign s of the physical tetrahedron T_s for even n
inline int tetra_sign(int n) { return (n / 2) % 2 == 0 ? 1 : -1; }

struct CorrelationTriple {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  CorrelationTriple() = default;
  CorrelationTriple(double c1, double c2, double c3) : c{c1, c2, c3} {
    for (double v : c)
      if (!(std::abs(v) <= 1.0 + 1e-12))
        throw ValidityError("correlation value outside [-1, 1]: " + std::to_string(v));
  }

  double operator[](int j) const { return c[j]; }
  double abs_sum() const { return std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]); }
  double norm() const { return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]); }
};

// The four bracketed eigenvalue expressions of an even-n M3N state, in the
// order Phi+, Phi-, Psi+, Psi- (each times 2^-n is an eigenvalue).
inline std::array<double, 4> even_spectrum_brackets(int n, const CorrelationTriple& t) {
  const double s = tetra_sign(n);
  const double c1 = t[0], c2 = t[1], c3 = t[2];
  return {1 + c1 + s * c2 + c3, 1 - c1 - s * c2 + c3, 1 + c1 - s * c2 - c3, 1 - c1 + s * c2 - c3};
}

struct M3NState {
  int n = 2;
  CorrelationTriple c;

  static bool physical(int n, const CorrelationTriple& t) {
    if (n % 2 == 0) {
      for (double b : even_spectrum_brackets(n, t))
        if (b < -1e-12) return false;
      return true;
    }
    return t[0] * t[0] + t[1] * t[1] + t[2] * t[2] <= 1.0 + 1e-12;
  }

  static M3NState make(int n, const CorrelationTriple& t) {
    if (n < 2) throw ParameterError("M3N state needs n >= 2");
    if (!physical(n, t))
      throw ValidityError(n % 2 == 0 ? "triple outside the physical tetrahedron for n=" + std::to_string(n)
                                     : "triple outside the unit ball for n=" + std::to_string(n));
    return M3NState{n, t};
  }
};

struct DenseState {
  int n = 1;
  Matrix rho;

  static DenseState make(int n, Matrix rho) {
    DenseState s{n, std::move(rho)};
    s.validate();
    return s;
  }

  void validate() const {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    if (rho.rows() != d || rho.cols() != d) throw ParameterError("density matrix has wrong dimension");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw ValidityError("density matrix not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-12) throw ValidityError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) throw ValidityError("density matrix not positive semidefinite");
  }
};

inline DenseState pure_state(int n, const Vector& psi) {
  Vector v = psi / psi.norm();
  Matrix rho = v * v.adjoint();
  return DenseState{n, rho};
}

inline DenseState maximally_mixed(int n) {
  require_dense(n);
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  return DenseState{n, Matrix::Identity(d, d) / static_cast<double>(d)};
}

struct StateFamily {
  enum class Tag { GHZ, W, Dicke, ClusterLinear, ClusterRect, Wei, Smolin, Singlet4, M3N, WhiteNoiseMix };

  Tag tag = Tag::GHZ;
  int k = 0;         // Dicke excitations
  int rows = 0;      // ClusterRect grid, 0 = derive from n
  int cols = 0;
  double x = 1.0;    // Wei weight
  double q = 1.0;    // WhiteNoiseMix weight of the inner state
  CorrelationTriple triple;
  std::shared_ptr<const StateFamily> inner;

  static StateFamily ghz() { return {}; }
  static StateFamily w() { return with(Tag::W); }
  static StateFamily dicke(int k) {
    auto f = with(Tag::Dicke);
    f.k = k;
    return f;
  }
  static StateFamily cluster_linear() { return with(Tag::ClusterLinear); }
  static StateFamily cluster_rect(int rows = 0, int cols = 0) {
    auto f = with(Tag::ClusterRect);
    f.rows = rows;
    f.cols = cols;
    return f;
  }
  static StateFamily wei(double x) {
    auto f = with(Tag::Wei);
    f.x = x;
    return f;
  }
  static StateFamily smolin() { return with(Tag::Smolin); }
  static StateFamily singlet4() { return with(Tag::Singlet4); }
  static StateFamily m3n(const CorrelationTriple& t) {
    auto f = with(Tag::M3N);
    f.triple = t;
    return f;
  }
  static StateFamily white_noise_mix(const StateFamily& in, double q) {
    auto f = with(Tag::WhiteNoiseMix);
    f.inner = std::make_shared<StateFamily>(in);
    f.q = q;
    return f;
  }

  std::string name() const {
    switch (tag) {
      case Tag::GHZ: return "ghz";
      case Tag::W: return "w";
      case Tag::Dicke: return "dicke";
      case Tag::ClusterLinear: return "cluster_linear";
      case Tag::ClusterRect: return "cluster_rect";
      case Tag::Wei: return "wei";
      case Tag::Smolin: return "smolin";
      case Tag::Singlet4: return "singlet4";
      case Tag::M3N: return "m3n";
      case Tag::WhiteNoiseMix: return "white_noise_mix";
    }
    return "?";
  }

  bool permutation_invariant() const {
    switch (tag) {
      case Tag::GHZ:
      case Tag::W:
      case Tag::Dicke:
      case Tag::Wei:
      case Tag::Smolin:
      case Tag::M3N: return true;
      case Tag::WhiteNoiseMix: return inner->permutation_invariant();
      default: return false;
    }
  }

 private:
  static StateFamily with(Tag t) {
    StateFamily f;
    f.tag = t;
    return f;
  }
};

namespace detail {

inline Vector basis_superposition(int n, const std::vector<std::uint64_t>& xs) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_of(n)));
  for (auto x : xs) v[static_cast<Eigen::Index>(x)] += 1.0;
  return v / v.norm();
}

inline Vector ghz_vector(int n) {
  return basis_superposition(n, {0, dim_of(n) - 1});
}

inline Vector dicke_vector(int n, int k) {
  std::vector<std::uint64_t> xs;
  for (std::uint64_t x = 0; x < dim_of(n); ++x)
    if (std::popcount(x) == k) xs.push_back(x);
  return basis_superposition(n, xs);
}

// |+>^n followed by CZ on every edge
inline Vector graph_state(int n, const std::vector<std::pair<int, int>>& edges) {
  const std::size_t d = dim_of(n);
  Vector v(static_cast<Eigen::Index>(d));
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t x = 0; x < d; ++x) {
    int sign = 0;
    for (auto [a, b] : edges) sign += qubit_bit(x, n, a) & qubit_bit(x, n, b);
    v[static_cast<Eigen::Index>(x)] = (sign & 1) ? -amp : amp;
  }
  return v;
}

inline Vector singlet4_vector() {
  // (|0011>+|1100> - (|0101>+|0110>+|1001>+|1010>)/2) / sqrt(3)
  Vector v = Vector::Zero(16);
  v[0b0011] = 1.0;
  v[0b1100] = 1.0;
  for (int x : {0b0101, 0b0110, 0b1001, 0b1010}) v[x] = -0.5;
  return v / std::sqrt(3.0);
}

inline void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ParameterError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace detail

// (1/2^n)(I + sum_j c_j sigma_j^{(x)n}); no validity check
inline Matrix m3n_matrix(int n, const CorrelationTriple& t) {
  const std::size_t d = dim_of(n);
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const double norm = 1.0 / static_cast<double>(d);
  for (int j = 1; j <= 3; ++j) {
    std::vector<int> s(static_cast<std::size_t>(n), j);
    auto act = PauliAction::from(s, n);
    for (std::size_t x = 0; x < d; ++x)
      rho(static_cast<Eigen::Index>(x ^ act.flip), static_cast<Eigen::Index>(x)) += t[j - 1] * norm * act.phase(x);
  }
  for (std::size_t x = 0; x < d; ++x) rho(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) += norm;
  return rho;
}

inline DenseState m3n_density(const M3NState& state) {
  require_dense(state.n);
  if (!M3NState::physical(state.n, state.c)) throw ValidityError("triple outside the physical region");
  return DenseState{state.n, m3n_matrix(state.n, state.c)};
}

struct SpectrumEntry {
  double value;
  int multiplicity;
  std::string label;
};

inline std::vector<SpectrumEntry> m3n_spectrum(const M3NState& state) {
  const int n = state.n;
  if (!M3NState::physical(n, state.c)) throw ValidityError("triple outside the physical region");
  const double scale = std::ldexp(1.0, -n);
  if (n % 2 == 0) {
    auto b = even_spectrum_brackets(n, state.c);
    const int mult = 1 << (n - 2);
    return {{b[0] * scale, mult, "Phi+"}, {b[1] * scale, mult, "Phi-"}, {b[2] * scale, mult, "Psi+"},
            {b[3] * scale, mult, "Psi-"}};
  }
  const double r = state.c.norm();
  const int mult = 1 << (n - 1);
  return {{(1 + r) * scale, mult, "+"}, {(1 - r) * scale, mult, "-"}};
}

inline DenseState build_state(const StateFamily& f, int n) {
  using Tag = StateFamily::Tag;
  require_dense(n);
  switch (f.tag) {
    case Tag::GHZ:
      if (n < 2) throw ParameterError("GHZ needs n >= 2");
      return pure_state(n, detail::ghz_vector(n));
    case Tag::W:
      if (n < 2) throw ParameterError("W needs n >= 2");
      return pure_state(n, detail::dicke_vector(n, 1));
    case Tag::Dicke:
      if (f.k < 0 || f.k > n) throw ParameterError("Dicke excitation count must satisfy 0 <= k <= n");
      return pure_state(n, detail::dicke_vector(n, f.k));
    case Tag::ClusterLinear: {
      if (n < 2) throw ParameterError("cluster state needs n >= 2");
      std::vector<std::pair<int, int>> edges;
      for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      return pure_state(n, detail::graph_state(n, edges));
    }
    case Tag::ClusterRect: {
      int rows = f.rows, cols = f.cols;
      if (rows == 0 && cols == 0) {
        if (n % 2 != 0 || n < 4) throw ParameterError("rectangular cluster needs even n >= 4");
        rows = 2;
        cols = n / 2;
      }
      if (rows < 1 || cols < 1 || rows * cols != n) throw ParameterError("cluster grid rows*cols must equal n");
      std::vector<std::pair<int, int>> edges;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          int q = r * cols + c;
          if (c + 1 < cols) edges.emplace_back(q, q + 1);
          if (r + 1 < rows) edges.emplace_back(q, q + cols);
        }
      return pure_state(n, detail::graph_state(n, edges));
    }
    case Tag::Wei: {
      detail::check_unit(f.x, "Wei weight x");
      if (n < 2) throw ParameterError("Wei state needs n >= 2");
      Vector g = detail::ghz_vector(n);
      Matrix rho = f.x * (g * g.adjoint());
      const double w = (1.0 - f.x) / (2.0 * n);
      const std::uint64_t all = dim_of(n) - 1;
      for (int k = 0; k < n; ++k) {
        std::uint64_t e = std::uint64_t{1} << k;
        rho(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) += w;
        rho(static_cast<Eigen::Index>(all ^ e), static_cast<Eigen::Index>(all ^ e)) += w;
      }
      return DenseState{n, rho};
    }
    case Tag::Smolin: {
      if (n < 4 || n % 2 != 0) throw ParameterError("Smolin state needs even n >= 4");
      double s = tetra_sign(n);
      return DenseState{n, m3n_matrix(n, CorrelationTriple(s, s, s))};
    }
    case Tag::Singlet4:
      if (n != 4) throw ParameterError("singlet state is defined for n = 4 only");
      return pure_state(n, detail::singlet4_vector());
    case Tag::M3N:
      return m3n_density(M3NState::make(n, f.triple));
    case Tag::WhiteNoiseMix: {
      detail::check_unit(f.q, "mixing weight q");
      if (!f.inner) throw ParameterError("noise mixture needs an inner family");
      DenseState in = build_state(*f.inner, n);
      const auto d = static_cast<Eigen::Index>(dim_of(n));
      Matrix rho = f.q * in.rho + (1.0 - f.q) / static_cast<double>(d) * Matrix::Identity(d, d);
      return DenseState{n, rho};
    }
  }
  throw ParameterError("unknown state family");
}

// P rho P^dagger for a permutation of qubits: new qubit perm[q] holds old qubit q
inline Matrix permute_qubits(const Matrix& rho, int n, const std::vector<int>& perm) {
  const std::size_t d = dim_of(n);
  std::vector<std::size_t> map(d);
  for (std::size_t x = 0; x < d; ++x) {
    std::size_t y = 0;
    for (int q = 0; q < n; ++q)
      if (qubit_bit(x, n, q)) y |= std::size_t{1} << (n - 1 - perm[static_cast<std::size_t>(q)]);
    map[x] = y;
  }
  Matrix out(rho.rows(), rho.cols());
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      out(static_cast<Eigen::Index>(map[a]), static_cast<Eigen::Index>(map[b])) =
          rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return out;
}

}  // namespace entbound
