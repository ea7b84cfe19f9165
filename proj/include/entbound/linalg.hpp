#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>

namespace entbound {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using Real3 = Eigen::Vector3d;
using Rot3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEigenClamp = 1e-9;

inline std::size_t dim_of(int n) { return std::size_t{1} << n; }

// bit of qubit q (qubit 0 is the most significant / leftmost factor)
inline int qubit_bit(std::uint64_t x, int n, int q) {
  return static_cast<int>((x >> (n - 1 - q)) & 1u);
}

inline Matrix2 pauli_matrix(int k) {
  Matrix2 m;
  switch (k) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Action of a Pauli string on a basis state: P|x> = phase * |x ^ flip>.
struct PauliAction {
  std::uint64_t flip = 0;
  std::uint64_t y_mask = 0;
  std::uint64_t z_mask = 0;
  int y_count = 0;

  template <class Seq>
  static PauliAction from(const Seq& s, int n) {
    PauliAction a;
    for (int q = 0; q < n; ++q) {
      std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
      int k = s[q];
      if (k == 1 || k == 2) a.flip |= bit;
      if (k == 2) {
        a.y_mask |= bit;
        ++a.y_count;
      }
      if (k == 3) a.z_mask |= bit;
    }
    return a;
  }

  // sigma2|0> = i|1>, sigma2|1> = -i|0>, sigma3|1> = -|1>
  cplx phase(std::uint64_t x) const {
    int ones_y = std::popcount(x & y_mask);
    int sign = std::popcount(x & z_mask) + ones_y;
    // i^(y_count) * (-1)^(ones among y) * (-1)^(ones among z)
    static const cplx ipow[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    cplx p = ipow[y_count & 3];
    return (sign & 1) ? -p : p;
  }
};

struct HermitianEig {
  Eigen::VectorXd values;
  Matrix vectors;
};

inline HermitianEig eigh(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double clamp_eigenvalue(double v) { return (v < 0.0 && v > -kEigenClamp) ? 0.0 : v; }

// V f(lambda) V^dagger
template <class F>
Matrix spectral_apply(const HermitianEig& e, F f) {
  Eigen::VectorXd fv(e.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(clamp_eigenvalue(e.values[i]));
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

inline Matrix matrix_sqrt_psd(const Matrix& m) {
  return spectral_apply(eigh(m), [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

// rho -> (I..U..I) rho on qubit q, left multiplication only
inline void apply_left(Matrix& m, int n, int q, const Matrix2& u) {
  const std::size_t stride = std::size_t{1} << (n - 1 - q);
  const std::size_t dim = dim_of(n);
  for (std::size_t x = 0; x < dim; ++x) {
    if (x & stride) continue;
    std::size_t y = x | stride;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      cplx a = m(x, c), b = m(y, c);
      m(x, c) = u(0, 0) * a + u(0, 1) * b;
      m(y, c) = u(1, 0) * a + u(1, 1) * b;
    }
  }
}

inline void apply_right_adjoint(Matrix& m, int n, int q, const Matrix2& u) {
  const std::size_t stride = std::size_t{1} << (n - 1 - q);
  const std::size_t dim = dim_of(n);
  const Matrix2 ua = u.conjugate();
  for (std::size_t x = 0; x < dim; ++x) {
    if (x & stride) continue;
    std::size_t y = x | stride;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      cplx a = m(r, x), b = m(r, y);
      m(r, x) = a * ua(0, 0) + b * ua(0, 1);
      m(r, y) = a * ua(1, 0) + b * ua(1, 1);
    }
  }
}

// U on qubit q, rho -> U rho U^dagger
inline void conjugate_qubit(Matrix& m, int n, int q, const Matrix2& u) {
  apply_left(m, n, q, u);
  apply_right_adjoint(m, n, q, u);
}

inline void apply_vector(Vector& v, int n, int q, const Matrix2& u) {
  const std::size_t stride = std::size_t{1} << (n - 1 - q);
  const std::size_t dim = dim_of(n);
  for (std::size_t x = 0; x < dim; ++x) {
    if (x & stride) continue;
    std::size_t y = x | stride;
    cplx a = v[x], b = v[y];
    v[x] = u(0, 0) * a + u(0, 1) * b;
    v[y] = u(1, 0) * a + u(1, 1) * b;
  }
}

}  // namespace entbound
