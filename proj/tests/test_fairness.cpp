#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecofair/error.hpp"
#include "ecofair/fairness.hpp"
#include "ecofair/rng.hpp"

namespace ecofair {
namespace {

// Pairwise mean absolute difference over twice the mean.
double gini_oracle(const std::vector<double>& c) {
  const double n = static_cast<double>(c.size());
  double sum = 0.0, diff = 0.0;
  for (double a : c) {
    sum += a;
    for (double b : c) diff += std::abs(a - b);
  }
  return sum == 0.0 ? 0.0 : diff / (2.0 * n * sum);
}

std::vector<double> random_costs(Rng& rng) {
  std::vector<double> c(2 + rng.index(63));
  for (auto& x : c) x = rng.uniform(0, 100);
  return c;
}

TEST(Gini, Examples) {
  EXPECT_EQ(gini(std::vector<double>{1, 1, 1, 1}), 0.0);
  EXPECT_NEAR(gini(std::vector<double>{1, 2, 3}), 8.0 / 36.0, 1e-15);
  EXPECT_NEAR(gini(std::vector<double>{10, 20, 30, 40}), 0.25, 1e-15);
}

TEST(Gini, EdgeCases) {
  EXPECT_EQ(gini(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(gini(std::vector<double>{5}), 0.0);
  EXPECT_EQ(gini(std::vector<double>{}), 0.0);
  EXPECT_THROW(gini(std::vector<double>{1, -1}), DomainError);
  EXPECT_THROW(gini(std::vector<double>{1, NAN}), DomainError);
}

TEST(Gini, MaximalInequality) {
  std::vector<double> c(8, 0.0);
  c[3] = 12.0;
  EXPECT_NEAR(gini(c), 7.0 / 8.0, 1e-15);
}

TEST(MinMax, Examples) {
  EXPECT_EQ(minmax(std::vector<double>{5, 5}), 1.0);
  EXPECT_EQ(minmax(std::vector<double>{10, 20, 30, 40}), 0.25);
  EXPECT_EQ(minmax(std::vector<double>{40, 10, 30, 20}), 0.25);
  EXPECT_EQ(minmax(std::vector<double>{0, 0}), 1.0);
  EXPECT_THROW(minmax(std::vector<double>{3, -2}), DomainError);
}

TEST(Phi, Examples) {
  const std::vector<double> eq{4, 4, 4};
  EXPECT_EQ(phi(eq, FairnessKind::gini), 0.0);
  EXPECT_EQ(phi(eq, FairnessKind::minmax), 0.0);
  EXPECT_DOUBLE_EQ(phi(std::vector<double>{10, 20, 30, 40}, FairnessKind::minmax), 0.75);
  EXPECT_NEAR(phi(std::vector<double>{1, 2, 3}, FairnessKind::gini), 0.2222, 1e-4);
}

TEST(Schedule, Linear) {
  EXPECT_DOUBLE_EQ(schedule_beta_linear(50, 0.01, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(schedule_beta_linear(200, 0.01, 1.0), 1.0);
  EXPECT_EQ(schedule_beta_linear(0, 0.3, 9.0), 0.0);
}

TEST(Schedule, Tracking) {
  EXPECT_DOUBLE_EQ(schedule_beta_tracking(0.3, 0.4, 0.25, 0.5, 50.0), 0.375);
  EXPECT_EQ(schedule_beta_tracking(0.3, 0.2, 0.25, 0.5, 50.0), 0.3);
  EXPECT_EQ(schedule_beta_tracking(50.0, 0.9, 0.25, 0.5, 50.0), 50.0);
}

TEST(Penalty, Examples) {
  std::vector<double> r{-1, -2, -3};
  apply_fairness_penalty(r, 0.0, 0.7);
  EXPECT_EQ(r, (std::vector<double>{-1, -2, -3}));
  apply_fairness_penalty(r, 2.0, 0.25);
  EXPECT_EQ(r, (std::vector<double>{-1.5, -2.5, -3.5}));
  apply_fairness_penalty(r, 40.0, 0.0);
  EXPECT_EQ(r, (std::vector<double>{-1.5, -2.5, -3.5}));
}

TEST(Properties, OracleAgreement) {
  Rng rng(2024);
  for (int i = 0; i < 10000; ++i) {
    const auto c = random_costs(rng);
    ASSERT_NEAR(gini(c), gini_oracle(c), 1e-9);
  }
}

TEST(Properties, ScaleAndPermutationInvariance) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    auto c = random_costs(rng);
    const double g = gini(c), m = minmax(c);
    const double a = std::exp(rng.uniform(-5, 5));
    auto scaled = c;
    for (auto& x : scaled) x *= a;
    ASSERT_NEAR(gini(scaled), g, 1e-12);
    ASSERT_NEAR(minmax(scaled), m, 1e-12);
    for (std::size_t k = c.size() - 1; k > 0; --k) std::swap(c[k], c[rng.index(k + 1)]);
    ASSERT_NEAR(gini(c), g, 1e-12);
    ASSERT_EQ(minmax(c), m);
  }
}

TEST(Properties, Range) {
  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    const auto c = random_costs(rng);
    const double n = static_cast<double>(c.size());
    ASSERT_GE(gini(c), 0.0);
    ASSERT_LE(gini(c), (n - 1) / n + 1e-15);
    ASSERT_GE(minmax(c), 0.0);
    ASSERT_LE(minmax(c), 1.0);
  }
}

TEST(Properties, TransferFromRichestToPoorest) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    auto c = random_costs(rng);
    const auto hi = std::max_element(c.begin(), c.end());
    const auto lo = std::min_element(c.begin(), c.end());
    if (hi == lo) continue;
    const double before = gini(c);
    const double delta = rng.uniform(0, 1) * (*hi - *lo) / 2.0;
    *hi -= delta;
    *lo += delta;
    ASSERT_LE(gini(c), before + 1e-12);
  }
}

TEST(State, TrackingBetaIsMonotoneAndCapped) {
  FairnessParams p;
  p.beta_max = 3.0;
  p.eta_beta = 0.5;
  FairnessState s(p);
  Rng rng(8);
  double prev = 0.0;
  for (int t = 0; t < 5000; ++t) {
    std::vector<double> c(6);
    for (auto& x : c) x = rng.uniform(0, 10);
    s.update(c);
    ASSERT_GE(s.beta(), prev);
    ASSERT_LE(s.beta(), p.beta_max);
    prev = s.beta();
  }
  EXPECT_EQ(s.beta(), 3.0);
  EXPECT_EQ(s.steps(), 5000);
}

TEST(State, RegretAccumulatesHinge) {
  FairnessParams p;
  p.zeta = 0.1;
  FairnessState s(p);
  const std::vector<double> c{1, 2, 3};
  s.update(c);
  s.update(c);
  EXPECT_NEAR(s.cumulative_regret(), 2.0 * (8.0 / 36.0 - 0.1), 1e-15);
  EXPECT_NEAR(s.last_phi(), 8.0 / 36.0, 1e-15);
}

TEST(State, MinMaxTargetIsComplementOfFloor) {
  FairnessParams p;
  p.kind = FairnessKind::minmax;
  p.rho = 0.4;
  EXPECT_DOUBLE_EQ(FairnessState(p).target(), 0.6);
}

TEST(State, LinearSchedule) {
  FairnessParams p;
  p.schedule = BetaSchedule::linear;
  p.slope = 0.25;
  p.beta_max = 1.0;
  FairnessState s(p);
  const std::vector<double> c{1, 2};
  std::vector<double> betas;
  for (int t = 0; t < 6; ++t) {
    s.update(c);
    betas.push_back(s.beta());
  }
  EXPECT_LE(betas.front(), 0.25);
  EXPECT_EQ(betas.back(), 1.0);
}

TEST(State, FrozenStaysZero) {
  FairnessState s(FairnessParams{});
  s.freeze();
  const std::vector<double> c{1, 100};
  for (int t = 0; t < 100; ++t) s.update(c);
  EXPECT_EQ(s.beta(), 0.0);
}

TEST(Parse, RoundTrip) {
  EXPECT_EQ(parse_fairness_kind(to_string(FairnessKind::minmax)), FairnessKind::minmax);
  EXPECT_EQ(parse_beta_schedule(to_string(BetaSchedule::linear)), BetaSchedule::linear);
  EXPECT_THROW(parse_fairness_kind("nash"), InvalidConfig);
}

}  // namespace
}  // namespace ecofair
