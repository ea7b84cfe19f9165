#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "qstate.hpp"

namespace entbound {

inline constexpr int kEagerTensorCap = 8;

inline cplx expectation_complex(const DenseState& state, const std::vector<int>& pauli_string) {
  const int n = state.n;
  if (static_cast<int>(pauli_string.size()) != n)
    throw ParameterError("Pauli string length " + std::to_string(pauli_string.size()) + " differs from n=" +
                         std::to_string(n));
  for (int k : pauli_string)
    if (k < 0 || k > 3) throw ParameterError("Pauli index must be in {0,1,2,3}");
  auto act = PauliAction::from(pauli_string, n);
  cplx acc = 0.0;
  for (std::uint64_t x = 0; x < dim_of(n); ++x)
    acc += act.phase(x) * state.rho(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x ^ act.flip));
  return acc;
}

inline double expectation(const DenseState& state, const std::vector<int>& pauli_string) {
  cplx v = expectation_complex(state, pauli_string);
  if (std::abs(v.imag()) > 1e-10) throw ValidityError("expectation value has an imaginary part");
  return v.real();
}

inline CorrelationTriple correlation_triple(const DenseState& state) {
  std::array<double, 3> c{};
  for (int j = 1; j <= 3; ++j) c[j - 1] = expectation(state, std::vector<int>(static_cast<std::size_t>(state.n), j));
  return CorrelationTriple(c[0], c[1], c[2]);
}

inline std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Entries T_{i1..in} = Tr(rho sigma_i1 x ... x sigma_in). Flat index is base 4
// with qubit 0 as the most significant digit.
class CorrelationTensor {
 public:
  static CorrelationTensor eager(const DenseState& state) {
    if (state.n > kEagerTensorCap)
      throw CapacityError("eager correlation tensor limited to n <= " + std::to_string(kEagerTensorCap));
    CorrelationTensor t;
    t.n_ = state.n;
    const std::size_t total = ipow(4, state.n);
    auto entries = std::make_shared<std::vector<double>>(total);
    for (std::size_t f = 0; f < total; ++f) (*entries)[f] = evaluate(state, f);
    t.eager_ = entries;
    return t;
  }

  static CorrelationTensor lazy(const DenseState& state) {
    CorrelationTensor t;
    t.n_ = state.n;
    t.lazy_ = std::make_shared<LazyCache>();
    t.lazy_->state = state;
    return t;
  }

  static CorrelationTensor from_entries(int n, std::vector<double> entries) {
    if (entries.size() != ipow(4, n)) throw ParameterError("tensor entry count must be 4^n");
    CorrelationTensor t;
    t.n_ = n;
    t.eager_ = std::make_shared<std::vector<double>>(std::move(entries));
    return t;
  }

  int n() const { return n_; }
  bool is_lazy() const { return lazy_ != nullptr; }

  double at_flat(std::size_t flat) const {
    if (eager_) return (*eager_)[flat];
    {
      std::lock_guard<std::mutex> lock(lazy_->mutex);
      auto it = lazy_->cache.find(flat);
      if (it != lazy_->cache.end()) return it->second;
    }
    double v = evaluate(lazy_->state, flat);
    std::lock_guard<std::mutex> lock(lazy_->mutex);
    lazy_->cache.emplace(flat, v);
    return v;
  }

  double at(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != n_) throw ParameterError("tensor index length differs from n");
    std::size_t f = 0;
    for (int k : idx) {
      if (k < 0 || k > 3) throw ParameterError("tensor index digits must be in {0,1,2,3}");
      f = f * 4 + static_cast<std::size_t>(k);
    }
    return at_flat(f);
  }

  // Entries with every index in {1,2,3}; flat base 3, digit d stands for sigma_{d+1}.
  std::vector<double> block3() const {
    const std::size_t total = ipow(3, n_);
    std::vector<double> out(total);
    for (std::size_t b = 0; b < total; ++b) {
      std::size_t rem = b, f = 0, mul = 1;
      for (int q = 0; q < n_; ++q) {
        f += (rem % 3 + 1) * mul;
        rem /= 3;
        mul *= 4;
      }
      out[b] = at_flat(f);
    }
    return out;
  }

  // invariance under every adjacent transposition of qubits
  bool is_symmetric(double tol = 1e-9) const {
    const std::size_t total = ipow(4, n_);
    for (int q = 0; q + 1 < n_; ++q) {
      const std::size_t hi = ipow(4, n_ - 1 - q), lo = ipow(4, n_ - 2 - q);
      for (std::size_t f = 0; f < total; ++f) {
        std::size_t a = (f / hi) % 4, b = (f / lo) % 4;
        if (a == b) continue;
        std::size_t g = f - a * hi - b * lo + b * hi + a * lo;
        if (std::abs(at_flat(f) - at_flat(g)) > tol) return false;
      }
    }
    return true;
  }

 private:
  struct LazyCache {
    DenseState state;
    std::mutex mutex;
    std::unordered_map<std::size_t, double> cache;
  };

  static double evaluate(const DenseState& state, std::size_t flat) {
    std::vector<int> s(static_cast<std::size_t>(state.n));
    for (int q = state.n - 1; q >= 0; --q) {
      s[static_cast<std::size_t>(q)] = static_cast<int>(flat % 4);
      flat /= 4;
    }
    return expectation(state, s);
  }

  int n_ = 0;
  std::shared_ptr<const std::vector<double>> eager_;
  std::shared_ptr<LazyCache> lazy_;
};

inline CorrelationTensor correlation_tensor(const DenseState& state) {
  return state.n <= kEagerTensorCap ? CorrelationTensor::eager(state) : CorrelationTensor::lazy(state);
}

struct Angles {
  double theta = 0.0;
  double psi = 0.0;
  double phi = 0.0;
};

// Maps arbitrary reals onto theta in [0, pi], psi, phi in [0, 2pi) without
// changing the rotation.
inline Angles normalize_angles(Angles a) {
  auto wrap = [](double v) {
    double r = std::fmod(v, 2 * kPi);
    if (r < 0) r += 2 * kPi;
    if (r >= 2 * kPi) r = 0.0;
    return r;
  };
  a.theta = wrap(a.theta);
  if (a.theta > kPi) {
    a.theta = 2 * kPi - a.theta;
    a.psi += kPi;
    a.phi += kPi;
  }
  a.psi = wrap(a.psi);
  a.phi = wrap(a.phi);
  return a;
}

// U = Rz(phi) Rx(theta) Rz(psi), Rz(a) = diag(e^{-ia/2}, e^{ia/2})
inline Matrix2 su2_from_angles(const Angles& a) {
  auto rz = [](double t) {
    Matrix2 m;
    m << std::polar(1.0, -t / 2), 0, 0, std::polar(1.0, t / 2);
    return m;
  };
  Matrix2 rx;
  const double c = std::cos(a.theta / 2), s = std::sin(a.theta / 2);
  rx << c, cplx(0, -s), cplx(0, -s), c;
  return rz(a.phi) * rx * rz(a.psi);
}

// O with U sigma_k U^dagger = sum_j O_jk sigma_j
inline Rot3 so3_from_su2(const Matrix2& u) {
  Rot3 o;
  for (int k = 1; k <= 3; ++k) {
    Matrix2 m = u * pauli_matrix(k) * u.adjoint();
    for (int j = 1; j <= 3; ++j) o(j - 1, k - 1) = 0.5 * (pauli_matrix(j) * m).trace().real();
  }
  return o;
}

inline Rot3 so3_from_angles(const Angles& a) { return so3_from_su2(su2_from_angles(a)); }

// inverse of so3_from_angles for O = Rz(phi) Rx(theta) Rz(psi)
inline Angles angles_from_so3(const Rot3& o) {
  Angles a;
  const double st = std::sqrt(o(0, 2) * o(0, 2) + o(1, 2) * o(1, 2));
  a.theta = std::atan2(st, o(2, 2));
  if (st > 1e-12) {
    a.phi = std::atan2(o(0, 2), -o(1, 2));
    a.psi = std::atan2(o(2, 0), o(2, 1));
  } else {
    a.psi = 0.0;
    a.phi = std::atan2(o(1, 0), o(0, 0));
  }
  return normalize_angles(a);
}

struct LocalRotation {
  std::vector<Angles> per_qubit;
  bool shared = false;
  Angles shared_angles;

  static LocalRotation identity() { return shared_rotation(Angles{}); }
  static LocalRotation shared_rotation(const Angles& a) {
    LocalRotation r;
    r.shared = true;
    r.shared_angles = normalize_angles(a);
    return r;
  }
  static LocalRotation per_qubit_rotation(const std::vector<Angles>& as) {
    LocalRotation r;
    for (const auto& a : as) r.per_qubit.push_back(normalize_angles(a));
    return r;
  }

  Angles angles_for(int q) const { return shared ? shared_angles : per_qubit.at(static_cast<std::size_t>(q)); }

  void check(int n) const {
    if (!shared && static_cast<int>(per_qubit.size()) != n)
      throw ParameterError("rotation has " + std::to_string(per_qubit.size()) + " angle triples for n=" +
                           std::to_string(n));
  }

  std::vector<Rot3> matrices(int n) const {
    check(n);
    std::vector<Rot3> out;
    for (int q = 0; q < n; ++q) out.push_back(so3_from_angles(angles_for(q)));
    return out;
  }
};

namespace detail {

// contracts base-3 digit `pos` (of `digits`) of v with row vector w
inline std::vector<double> contract_digit(const std::vector<double>& v, int digits, int pos, const double* w) {
  const std::size_t lo = ipow(3, digits - 1 - pos);
  const std::size_t hi = v.size() / (3 * lo);
  std::vector<double> out(hi * lo);
  for (std::size_t a = 0; a < hi; ++a)
    for (std::size_t b = 0; b < lo; ++b) {
      const std::size_t base = a * 3 * lo + b;
      out[a * lo + b] = w[0] * v[base] + w[1] * v[base + lo] + w[2] * v[base + 2 * lo];
    }
  return out;
}

}  // namespace detail

// c~_j = sum_k T_k prod_m O^(m)_{j k_m} over the {1,2,3}^n block
inline std::array<double, 3> contract_triple(const std::vector<double>& block, int n, const std::vector<Rot3>& os) {
  std::array<double, 3> out{};
  for (int j = 0; j < 3; ++j) {
    std::vector<double> v = block;
    for (int q = n - 1; q >= 0; --q) {
      double w[3] = {os[static_cast<std::size_t>(q)](j, 0), os[static_cast<std::size_t>(q)](j, 1),
                     os[static_cast<std::size_t>(q)](j, 2)};
      v = detail::contract_digit(v, q + 1, q, w);
    }
    out[static_cast<std::size_t>(j)] = v[0];
  }
  return out;
}

// V_j with c~_j = O^(k)_j . V_j when all qubits but k are contracted
inline Rot3 contract_all_but(const std::vector<double>& block, int n, const std::vector<Rot3>& os, int k) {
  Rot3 v;
  for (int j = 0; j < 3; ++j) {
    std::vector<double> cur = block;
    for (int q = n - 1; q > k; --q) {
      double w[3] = {os[static_cast<std::size_t>(q)](j, 0), os[static_cast<std::size_t>(q)](j, 1),
                     os[static_cast<std::size_t>(q)](j, 2)};
      cur = detail::contract_digit(cur, q + 1, q, w);
    }
    for (int q = k - 1; q >= 0; --q) {
      double w[3] = {os[static_cast<std::size_t>(q)](j, 0), os[static_cast<std::size_t>(q)](j, 1),
                     os[static_cast<std::size_t>(q)](j, 2)};
      cur = detail::contract_digit(cur, q + 2, q, w);
    }
    for (int l = 0; l < 3; ++l) v(j, l) = cur[static_cast<std::size_t>(l)];
  }
  return v;
}

inline CorrelationTriple rotated_triple(const CorrelationTensor& tensor, const LocalRotation& rot) {
  auto os = rot.matrices(tensor.n());
  auto c = contract_triple(tensor.block3(), tensor.n(), os);
  for (double& v : c) v = std::clamp(v, -1.0, 1.0);
  return CorrelationTriple(c[0], c[1], c[2]);
}

inline DenseState rotate_state(const DenseState& state, const LocalRotation& rot) {
  rot.check(state.n);
  DenseState out = state;
  for (int q = 0; q < state.n; ++q) conjugate_qubit(out.rho, state.n, q, su2_from_angles(rot.angles_for(q)));
  return out;
}

}  // namespace entbound
