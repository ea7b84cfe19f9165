#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "pauli.hpp"
#include "qstate.hpp"

namespace entbound {

// |beta_i^{+-}> = (|i> +- |i-bar>)/sqrt2 with the leading bit of i equal to 0
struct GHZBasisIndex {
  std::uint64_t i = 0;
  bool plus = true;

  void check(int n) const {
    if (n < 1 || n > 63) throw IndexError("GHZ basis index needs 1 <= n <= 63");
    if (i >> (n - 1)) throw IndexError("GHZ basis index must have leading bit 0");
  }

  // position in GHZDiagonalState::p
  std::size_t flat() const { return static_cast<std::size_t>(2 * i + (plus ? 0 : 1)); }
  static GHZBasisIndex from_flat(std::size_t f) { return {f / 2, f % 2 == 0}; }

  std::string label(int n) const {
    std::string s;
    for (int q = 0; q < n; ++q) s += qubit_bit(i, n, q) ? '1' : '0';
    s += plus ? '+' : '-';
    return s;
  }

  static GHZBasisIndex parse(const std::string& label, int n) {
    if (static_cast<int>(label.size()) != n + 1) throw IndexError("GHZ label '" + label + "' must have n bits and a sign");
    GHZBasisIndex idx;
    for (int q = 0; q < n; ++q) {
      char ch = label[static_cast<std::size_t>(q)];
      if (ch != '0' && ch != '1') throw IndexError("GHZ label '" + label + "' has a non-binary digit");
      idx.i = (idx.i << 1) | static_cast<std::uint64_t>(ch == '1');
    }
    char sign = label.back();
    if (sign != '+' && sign != '-') throw IndexError("GHZ label '" + label + "' must end in + or -");
    idx.plus = sign == '+';
    idx.check(n);
    return idx;
  }
};

struct GHZDiagonalState {
  int n = 1;
  std::vector<double> p;  // indexed by GHZBasisIndex::flat()

  static GHZDiagonalState make(int n, std::vector<double> p) {
    if (n < 1) throw ParameterError("GHZ-diagonal state needs n >= 1");
    if (p.size() != dim_of(n)) throw ParameterError("GHZ-diagonal state needs 2^n weights");
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= -1e-12)) throw ValidityError("GHZ-diagonal weights must be nonnegative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidityError("GHZ-diagonal weights must sum to 1");
    return GHZDiagonalState{n, std::move(p)};
  }

  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  double p_max() const { return p[argmax()]; }
};

inline Vector ghz_basis_vector(const GHZBasisIndex& idx, int n) {
  idx.check(n);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_of(n)));
  const std::uint64_t bar = (dim_of(n) - 1) ^ idx.i;
  const double a = 1.0 / std::sqrt(2.0);
  v[static_cast<Eigen::Index>(idx.i)] = a;
  v[static_cast<Eigen::Index>(bar)] = idx.plus ? a : -a;
  return v;
}

inline double ghz_overlap(const DenseState& state, const GHZBasisIndex& idx) {
  idx.check(state.n);
  const auto i = static_cast<Eigen::Index>(idx.i);
  const auto j = static_cast<Eigen::Index>((dim_of(state.n) - 1) ^ idx.i);
  const double cross = state.rho(i, j).real();
  return 0.5 * (state.rho(i, i).real() + state.rho(j, j).real()) + (idx.plus ? cross : -cross);
}

// dephasing in the GHZ basis: p_i^{+-} = <beta_i^{+-}|rho|beta_i^{+-}>
inline GHZDiagonalState ghz_diagonalise(const DenseState& state) {
  require_dense(state.n);
  std::vector<double> p(dim_of(state.n));
  for (std::size_t f = 0; f < p.size(); ++f) p[f] = ghz_overlap(state, GHZBasisIndex::from_flat(f));
  return GHZDiagonalState{state.n, std::move(p)};
}

inline M3NState m3nfy(const DenseState& state) {
  return M3NState::make(state.n, correlation_triple(state));
}

// 2(n-1) steps rho_j = (rho_{j-1} + U_j rho_{j-1} U_j^dagger)/2 with
// U_j = sigma1 sigma1, then sigma2 sigma2, on adjacent pairs
inline DenseState apply_m3nfication_channel(const DenseState& state) {
  require_dense(state.n);
  const int n = state.n;
  if (n < 2) throw ParameterError("M3N-fication needs n >= 2");
  Matrix rho = state.rho;
  for (int k : {1, 2}) {
    const Matrix2 u = pauli_matrix(k);
    for (int q = 0; q + 1 < n; ++q) {
      Matrix t = rho;
      conjugate_qubit(t, n, q, u);
      conjugate_qubit(t, n, q + 1, u);
      rho = 0.5 * (rho + t);
    }
  }
  return DenseState{n, rho};
}

inline double singlet_overlap_check(const GHZBasisIndex& idx = GHZBasisIndex{0b0011, true}) {
  Vector psi = detail::singlet4_vector();
  return std::norm(ghz_basis_vector(idx, 4).dot(psi));
}

}  // namespace entbound
