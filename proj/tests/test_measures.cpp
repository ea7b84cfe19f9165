#include <entbound/measures.hpp>
#include <entbound/pauli.hpp>

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace entbound;

namespace {

const SeparabilityLevel kFull4 = SeparabilityLevel::parts(4);

DenseState dense(int n, const CorrelationTriple& c) { return m3n_density(M3NState::make(n, c)); }

// uniform sample from the physical region of parity n, outside the octahedron
CorrelationTriple random_outside(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  for (;;) {
    CorrelationTriple t(u(rng), u(rng), u(rng));
    if (M3NState::physical(n, t) && h_value(t) > 0.01) return t;
  }
}

double wei_caption(double x) {
  if (x == 1.0) return 1.0;  // limit of the expression
  return std::log2(2 - 2 * x) + x * (std::log2(x) - std::log2(1 - x));
}

}  // namespace

TEST(HValue, Examples) {
  EXPECT_DOUBLE_EQ(h_value({1, 1, 1}), 1.0);
  EXPECT_NEAR(h_value({0.401, 0.362, 0.397}), 0.080, 1e-12);
  EXPECT_DOUBLE_EQ(h_value({0, 0, 0}), -0.5);
}

TEST(FD, Examples) {
  EXPECT_NEAR(f_D(0.08, DistanceKind::Trace), 0.040, 1e-15);
  EXPECT_NEAR(f_D(1.0, DistanceKind::Infidelity), 0.5, 1e-15);
  EXPECT_NEAR(f_D(0.5, DistanceKind::RelativeEntropy), 0.18872187554086717, 1e-14);
  EXPECT_THROW(f_D(0.0, DistanceKind::Trace), DomainError);
  EXPECT_THROW(f_D(-0.2, DistanceKind::RelativeEntropy), DomainError);
}

TEST(GD, Examples) {
  EXPECT_NEAR(g_D(0.97, DistanceKind::Trace), 0.470, 1e-12);
  EXPECT_NEAR(g_D(0.97, DistanceKind::Infidelity), 0.3294127789076801, 1e-14);
  EXPECT_NEAR(g_D(0.97, DistanceKind::Infidelity), 0.329, 5e-4);
  EXPECT_NEAR(g_D(0.97, DistanceKind::RelativeEntropy), 0.8056081421684237, 1e-14);
  EXPECT_NEAR(g_D(0.97, DistanceKind::SquaredBures), 0.36221219800327, 1e-13);
  EXPECT_THROW(g_D(0.5, DistanceKind::Trace), DomainError);
}

TEST(FD, MatchesClassicalDistanceOfSpectra) {
  // spectra of (1/3,1/3,h) and (1/3,1/3,0): ((1-h)/6 x3, (1+h)/2) against (1/6 x3, 1/2)
  for (double h = 0.05; h <= 0.95; h += 0.05) {
    std::vector<double> a = {(1 - h) / 6, (1 - h) / 6, (1 - h) / 6, (1 + h) / 2};
    std::vector<double> b = {1.0 / 6, 1.0 / 6, 1.0 / 6, 0.5};
    for (auto d : kAllDistances) EXPECT_NEAR(f_D(h, d), classical_distance(a, b, d), 1e-13);
  }
}

TEST(GD, MatchesTwoOutcomeDistance) {
  for (double p = 0.51; p <= 0.999; p += 0.01)
    for (auto d : kAllDistances) EXPECT_NEAR(g_D(p, d), classical_distance({p, 1 - p}, {0.5, 0.5}, d), 1e-13);
}

TEST(FD, MatchesDenseDistances) {
  for (int n : {2, 4}) {
    for (double h : {0.1, 0.5, 0.9}) {
      auto a = dense(n, canonical_corner_triple(n, 1.0 / 3, 1.0 / 3, h));
      auto b = dense(n, canonical_corner_triple(n, 1.0 / 3, 1.0 / 3, 0.0));
      for (auto d : kAllDistances) EXPECT_NEAR(matrix_distance(a, b, d), f_D(h, d), 1e-10) << to_string(d);
    }
  }
}

TEST(Monotonicity, ClosedFormsStrictlyIncrease) {
  for (auto d : kAllDistances) {
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
      double v = f_D(i / 1000.0, d);
      EXPECT_GT(v, prev) << to_string(d) << " h=" << i / 1000.0;
      prev = v;
    }
    prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
      double v = g_D(0.5 + i / 2000.0, d);
      EXPECT_GT(v, prev) << to_string(d);
      prev = v;
    }
  }
}

TEST(Monotonicity, BuresEqualsHellinger) {
  for (int i = 1; i <= 1000; ++i) {
    EXPECT_EQ(f_D(i / 1000.0, DistanceKind::SquaredBures), f_D(i / 1000.0, DistanceKind::SquaredHellinger));
    EXPECT_EQ(g_D(0.5 + i / 2000.0, DistanceKind::SquaredBures), g_D(0.5 + i / 2000.0, DistanceKind::SquaredHellinger));
  }
}

TEST(EntanglementM3N, Examples) {
  auto r = entanglement_m3n(M3NState::make(4, {1, 1, 1}), SeparabilityLevel::parts(3), DistanceKind::Trace);
  EXPECT_NEAR(r.value, 0.5, 1e-15);
  EXPECT_EQ(r.kind, ReportKind::Exact);
  auto g3 = entanglement_m3n(M3NState::make(3, {-0.497, 0.515, -0.341}), SeparabilityLevel::parts(3),
                             DistanceKind::Trace);
  EXPECT_NEAR(g3.value, 0.102, 5e-4);
  EXPECT_NEAR(g3.value, h_value({-0.497, 0.515, -0.341}) / std::sqrt(3.0), 1e-15);
  const double rt = 1 / std::sqrt(2.0);
  auto e5 = entanglement_m3n(M3NState::make(5, {rt, rt, 0}), SeparabilityLevel::parts(4), DistanceKind::Trace);
  EXPECT_NEAR(e5.value, 0.14644660940672627, 1e-14);
  // M = 3 is trivial at n = 5
  EXPECT_EQ(entanglement_m3n(M3NState::make(5, {rt, rt, 0}), SeparabilityLevel::parts(3), DistanceKind::Trace).value, 0.0);
}

TEST(EntanglementM3N, TrivialLevelsAndErrors) {
  auto st = M3NState::make(4, {1, 1, 1});
  EXPECT_EQ(entanglement_m3n(st, SeparabilityLevel::parts(2), DistanceKind::Trace).value, 0.0);
  // M = 2 is already trivial at n = 3
  EXPECT_EQ(entanglement_m3n(M3NState::make(3, {0.6, 0.6, 0.5}), SeparabilityLevel::parts(2), DistanceKind::Trace).value,
            0.0);
  EXPECT_THROW(entanglement_m3n(M3NState::make(3, {0.6, 0.6, 0.5}), SeparabilityLevel::parts(3),
                                DistanceKind::RelativeEntropy),
               UnsupportedError);
  EXPECT_THROW(entanglement_m3n(st, SeparabilityLevel::parts(5), DistanceKind::Trace), ParameterError);
  EXPECT_THROW(entanglement_m3n(st, SeparabilityLevel::with_partition({2, 3}), DistanceKind::Trace), ParameterError);
  auto six = M3NState::make(6, {-1, -1, -1});
  EXPECT_GT(entanglement_m3n(six, SeparabilityLevel::with_partition({3, 3}), DistanceKind::Trace).value, 0.0);
  EXPECT_EQ(entanglement_m3n(six, SeparabilityLevel::with_partition({4, 2}), DistanceKind::Trace).value, 0.0);
}

TEST(GenuineGhzDiag, Examples) {
  std::vector<double> uniform(8, 1.0 / 8);
  EXPECT_EQ(genuine_ghz_diag(GHZDiagonalState::make(3, uniform), DistanceKind::Trace).value, 0.0);
  std::vector<double> p(256, (1 - 0.817) / 255);
  p[0] = 0.817;
  auto r = genuine_ghz_diag(GHZDiagonalState::make(8, p), DistanceKind::RelativeEntropy);
  EXPECT_NEAR(r.value, 0.313, 5e-4);
  EXPECT_NEAR(r.value, 0.31340386881891596, 1e-12);
  std::vector<double> q(16, (1.0 / 3) / 15);
  q[6] = 2.0 / 3;
  EXPECT_NEAR(genuine_ghz_diag(GHZDiagonalState::make(4, q), DistanceKind::Trace).value, 1.0 / 6, 1e-15);
}

TEST(LowerBound, Examples) {
  auto r = lower_bound_from_triple({0.63, 0.63, -0.42}, 6, SeparabilityLevel::parts(4), DistanceKind::Trace);
  EXPECT_NEAR(r.value, 0.17, 0.005);
  EXPECT_EQ(r.kind, ReportKind::LowerBound);
  EXPECT_EQ(lower_bound_from_triple({0.3, 0.3, 0.3}, 4, SeparabilityLevel::parts(3), DistanceKind::Trace).value, 0.0);
  auto w = lower_bound_from_triple({0.75, 0.75, 0.5}, 4, SeparabilityLevel::parts(3), DistanceKind::RelativeEntropy);
  EXPECT_NEAR(w.value, 0.18872187554086717, 1e-14);
  EXPECT_NEAR(w.value, wei_caption(0.75), 1e-14);
}

TEST(IsSeparable, Examples) {
  EXPECT_TRUE(is_separable_m3n(M3NState::make(4, {1, 1, 1}), SeparabilityLevel::parts(2)));
  EXPECT_FALSE(is_separable_m3n(M3NState::make(4, {1, 1, 1}), SeparabilityLevel::parts(3)));
  auto six = M3NState::make(6, {-0.9, -0.8, -0.7});
  EXPECT_FALSE(is_separable_m3n(six, SeparabilityLevel::with_partition({3, 3})));
  EXPECT_TRUE(is_separable_m3n(six, SeparabilityLevel::with_partition({4, 2})));
  EXPECT_TRUE(is_separable_m3n(M3NState::make(6, {0.2, 0.2, 0.2}), SeparabilityLevel::with_partition({3, 3})));
  EXPECT_FALSE(is_separable_m3n(M3NState::make(5, {0.7, 0.7, 0}), SeparabilityLevel::parts(4)));
  EXPECT_TRUE(is_separable_m3n(M3NState::make(5, {0.7, 0.7, 0}), SeparabilityLevel::parts(3)));
}

TEST(ClosestSeparableEven, Examples) {
  auto a = closest_separable_even(M3NState::make(4, {1, 1, 1}), kFull4);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.c[j], 1.0 / 3, 1e-15);
  auto b = closest_separable_even(M3NState::make(2, {1, -1, 1}), SeparabilityLevel::parts(2));
  EXPECT_NEAR(b.c[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(b.c[1], -1.0 / 3, 1e-15);
  EXPECT_NEAR(b.c[2], 1.0 / 3, 1e-15);
  auto c = closest_separable_even(M3NState::make(6, {-1, -1, -1}), SeparabilityLevel::parts(6));
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(c.c[j], -1.0 / 3, 1e-15);
  EXPECT_THROW(closest_separable_even(M3NState::make(4, {0.2, 0.2, 0.2}), kFull4), AlreadySeparableError);
  EXPECT_THROW(closest_separable_even(M3NState::make(4, {1, 1, 1}), SeparabilityLevel::parts(2)),
               AlreadySeparableError);
  EXPECT_THROW(closest_separable_even(M3NState::make(3, {0.6, 0.6, 0.5}), SeparabilityLevel::parts(3)),
               ParameterError);
}

TEST(ClosestSeparableEven, RandomCornerStates) {
  std::mt19937_64 rng(41);
  for (int n : {2, 4}) {
    for (int k = 0; k < 20; ++k) {
      auto t = random_outside(n, rng);
      auto st = M3NState::make(n, t);
      auto out = closest_separable_even(st, SeparabilityLevel::parts(n));
      EXPECT_NEAR(out.c.abs_sum(), 1.0, 1e-12);
      auto cin = corner_coordinates(n, t);
      auto cout = corner_coordinates(n, out.c);
      EXPECT_NEAR(cin.p, cout.p, 1e-12);
      EXPECT_NEAR(cin.q, cout.q, 1e-12);
      EXPECT_EQ(cin.flip, cout.flip);
      auto a = m3n_density(st);
      auto b = m3n_density(out);
      for (auto d : kAllDistances) EXPECT_NEAR(matrix_distance(a, b, d), f_D(h_value(t), d), 1e-10);
    }
  }
}

TEST(ClosestSeparableEven, FaceGridNeverBeatsIt) {
  auto st = M3NState::make(4, {0.5, 0.6, 0.4});
  auto out = closest_separable_even(st, kFull4);
  DistanceEvaluator eval(m3n_density(st).rho, DistanceKind::Trace);
  const double best = eval(m3n_density(out).rho);
  const int r = 140;  // ~10^4 points on the face of the (+,+,+) octant
  for (int i = 0; i <= r; ++i)
    for (int j = 0; i + j <= r; ++j) {
      CorrelationTriple s(double(i) / r, double(j) / r, double(r - i - j) / r);
      EXPECT_GE(eval(m3n_matrix(4, s)), best - 1e-12);
    }
}

TEST(CornerCoordinates, RoundTrip) {
  std::mt19937_64 rng(43);
  for (int n : {2, 4, 6}) {
    for (int k = 0; k < 50; ++k) {
      auto t = random_outside(n, rng);
      auto back = triple_from_corner(n, corner_coordinates(n, t));
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(back[j], t[j], 1e-12);
    }
  }
}

TEST(ClosestSeparableOdd, Examples) {
  // pure geometry: the projection also accepts points outside the unit ball
  auto a = closest_separable_odd_trace(M3NState{3, {2.0 / 3, 2.0 / 3, 2.0 / 3}});
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.c[j], 1.0 / 3, 1e-15);
  const double r = 1 / std::sqrt(2.0);
  auto b = closest_separable_odd_trace(M3NState::make(3, {r, r, 0}));
  EXPECT_NEAR(b.c[0], 0.5, 1e-15);
  EXPECT_NEAR(b.c[1], 0.5, 1e-15);
  EXPECT_NEAR(b.c[2], 0.0, 1e-15);
  EXPECT_NEAR(0.5 * std::hypot(r - 0.5, r - 0.5), 0.14644660940672627, 1e-15);
  auto c = closest_separable_odd_trace(M3NState::make(3, {1, 0, 0}));
  EXPECT_EQ(c.c[0], 1.0);
  EXPECT_THROW(closest_separable_odd_trace(M3NState::make(3, {0.2, 0.2, 0.2})), AlreadySeparableError);
  EXPECT_THROW(closest_separable_odd_trace(M3NState::make(4, {1, 1, 1})), ParameterError);
}

TEST(ClosestSeparableOdd, HalfEuclideanDistanceEqualsFormula) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  while (checked < 10000) {
    CorrelationTriple t(u(rng), u(rng), u(rng));
    if (t.norm() > 1 || h_value(t) <= 0) continue;
    ++checked;
    auto st = M3NState::make(3, t);
    auto s = closest_separable_odd_trace(st);
    EXPECT_NEAR(s.c.abs_sum(), 1.0, 1e-12);
    const double half = 0.5 * std::sqrt(std::pow(t[0] - s.c[0], 2) + std::pow(t[1] - s.c[1], 2) +
                                        std::pow(t[2] - s.c[2], 2));
    const double formula = entanglement_m3n(st, SeparabilityLevel::parts(3), DistanceKind::Trace).value;
    ASSERT_NEAR(formula, half, 1e-12);
  }
}

TEST(ClosestSeparableOdd, TraceDistanceIsHalfEuclidean) {
  std::mt19937_64 rng(53);
  for (int k = 0; k < 20; ++k) {
    CorrelationTriple t = random_outside(5, rng);
    auto s = closest_separable_odd_trace(M3NState::make(5, t));
    const double half = 0.5 * std::sqrt(std::pow(t[0] - s.c[0], 2) + std::pow(t[1] - s.c[1], 2) +
                                        std::pow(t[2] - s.c[2], 2));
    EXPECT_NEAR(matrix_distance(dense(5, t), dense(5, s.c), DistanceKind::Trace), half, 1e-12);
  }
}

TEST(MatrixDistance, Examples) {
  std::mt19937_64 rng(59);
  auto rho = entbound::testing::random_state(2, rng);
  for (auto d : kAllDistances) EXPECT_NEAR(matrix_distance(rho, rho, d), 0.0, 1e-10);
  DenseState zero{1, Matrix::Zero(2, 2)}, one{1, Matrix::Zero(2, 2)};
  zero.rho(0, 0) = 1;
  one.rho(1, 1) = 1;
  EXPECT_NEAR(matrix_distance(zero, one, DistanceKind::Trace), 1.0, 1e-15);
  EXPECT_TRUE(std::isinf(matrix_distance(zero, one, DistanceKind::RelativeEntropy)));
  EXPECT_NEAR(matrix_distance(dense(4, {1, 1, 1}), dense(4, {1.0 / 3, 1.0 / 3, 1.0 / 3}), DistanceKind::Trace), 0.5,
              1e-12);
}

TEST(MatrixDistance, SymmetricDistances) {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 10; ++k) {
    auto a = entbound::testing::random_state(2, rng);
    auto b = entbound::testing::random_state(2, rng);
    for (auto d : {DistanceKind::Trace, DistanceKind::Infidelity, DistanceKind::SquaredBures,
                   DistanceKind::SquaredHellinger}) {
      EXPECT_NEAR(matrix_distance(a, b, d), matrix_distance(b, a, d), 1e-10);
      EXPECT_GT(matrix_distance(a, b, d), 0.0);
    }
    EXPECT_GT(matrix_distance(a, b, DistanceKind::RelativeEntropy), 0.0);
  }
}

TEST(ClassicalDistance, ExamplesAndCommutingAgreement) {
  for (auto d : kAllDistances) EXPECT_NEAR(classical_distance({0.2, 0.8}, {0.2, 0.8}, d), 0.0, 1e-15);
  EXPECT_NEAR(classical_distance({1, 0}, {0.5, 0.5}, DistanceKind::Trace), 0.5, 1e-15);
  EXPECT_THROW(classical_distance({1, 0}, {0.5, 0.5, 0}, DistanceKind::Trace), ParameterError);
  EXPECT_THROW(classical_distance({0.7, 0}, {0.5, 0.5}, DistanceKind::Trace), ParameterError);

  std::vector<double> p = {0.1, 0.2, 0.3, 0.4}, q = {0.25, 0.15, 0.35, 0.25};
  DenseState a{2, Matrix::Zero(4, 4)}, b{2, Matrix::Zero(4, 4)};
  for (int i = 0; i < 4; ++i) {
    a.rho(i, i) = p[static_cast<std::size_t>(i)];
    b.rho(i, i) = q[static_cast<std::size_t>(i)];
  }
  for (auto d : kAllDistances) EXPECT_NEAR(matrix_distance(a, b, d), classical_distance(p, q, d), 1e-10);
}

TEST(CrossDistance, CommonRankingOnGhzDiagonalStates) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0, 1);
  auto sample = [&](int n) {
    std::vector<double> p(dim_of(n));
    double rest = 0.0;
    for (double& v : p) rest += (v = u(rng));
    const double top = 0.5 + 0.5 * u(rng);
    for (double& v : p) v *= (1 - top) / rest;
    p[static_cast<std::size_t>(rng() % p.size())] += top;
    return GHZDiagonalState::make(n, p);
  };
  for (int k = 0; k < 200; ++k) {
    auto a = sample(3), b = sample(3);
    if (std::abs(a.p_max() - b.p_max()) < 1e-9) continue;
    const double ref = genuine_ghz_diag(a, DistanceKind::Trace).value - genuine_ghz_diag(b, DistanceKind::Trace).value;
    for (auto d : kAllDistances) {
      const double diff = genuine_ghz_diag(a, d).value - genuine_ghz_diag(b, d).value;
      EXPECT_EQ(diff > 0, ref > 0) << to_string(d);
    }
  }
}

TEST(LoccInvariance, PauliOnQubitZero) {
  for (int n : {2, 3, 4}) {
    CorrelationTriple t = n % 2 ? CorrelationTriple(0.6, -0.5, 0.4) : CorrelationTriple(0.7, 0.5, 0.4);
    if (n == 2) t = CorrelationTriple(0.6, -0.4, 0.2);
    auto st = M3NState::make(n, t);
    auto rho = m3n_density(st);
    for (int k = 1; k <= 3; ++k) {
      DenseState flipped = rho;
      conjugate_qubit(flipped.rho, n, 0, pauli_matrix(k));
      auto t2 = correlation_triple(flipped);
      auto expected = pauli_flip(t, k);
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(t2[j], expected[j], 1e-14);
      auto st2 = M3NState::make(n, t2);
      for (auto d : kAllDistances) {
        if (n % 2 && d != DistanceKind::Trace) continue;
        EXPECT_NEAR(entanglement_m3n(st2, SeparabilityLevel::parts(n), d).value,
                    entanglement_m3n(st, SeparabilityLevel::parts(n), d).value, 1e-14);
      }
    }
  }
}

TEST(WeiIdentity, RelativeEntropyCaptionFormula) {
  for (int n : {4, 6, 8}) {
    auto rho = build_state(StateFamily::wei(0.8), n);
    auto t = correlation_triple(rho);
    EXPECT_NEAR(t[0], 0.8, 1e-14);
    EXPECT_NEAR(std::abs(t[1]), 0.8, 1e-14);
    EXPECT_NEAR(t[2], 0.6, 1e-14);
  }
  for (int i = 1; i <= 100; ++i) {
    const double x = 0.5 + 0.5 * i / 100.0;
    const double v = lower_bound_from_triple({x, x, 2 * x - 1}, 4, SeparabilityLevel::parts(4),
                                             DistanceKind::RelativeEntropy).value;
    EXPECT_NEAR(v, wei_caption(x), 1e-12) << x;
  }
  for (int i = 0; i <= 50; ++i) {
    const double x = 0.5 * i / 50.0;
    auto t = correlation_triple(build_state(StateFamily::wei(x), 4));
    EXPECT_EQ(lower_bound_from_triple(t, 4, SeparabilityLevel::parts(4), DistanceKind::RelativeEntropy).value, 0.0);
  }
}
