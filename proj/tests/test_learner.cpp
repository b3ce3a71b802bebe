#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "ecofair/error.hpp"
#include "ecofair/learner.hpp"
#include "fixtures.hpp"

namespace ecofair {
namespace {

LinearSoftmaxPolicy random_policy(std::size_t actions, std::size_t features, Rng& rng, double spread = 1.0) {
  PolicySpec spec;
  spec.actions = actions;
  spec.features = features;
  spec.temperature = rng.uniform(0.5, 2.0);
  LinearSoftmaxPolicy p(spec);
  for (auto& w : p.weights()) w = rng.uniform(-spread, spread);
  return p;
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1, 1);
  return x;
}

std::vector<std::uint8_t> random_mask(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> m(n);
  for (auto& b : m) b = rng.bernoulli(0.7) ? 1 : 0;
  m[rng.index(n)] = 1;
  return m;
}

TEST(Policy, ZeroWeightsAreUniform) {
  LinearSoftmaxPolicy p({.features = 3, .actions = 5});
  const std::vector<double> x{1, 2, 3};
  for (double pi : p.probabilities(x)) EXPECT_DOUBLE_EQ(pi, 0.2);
  Rng rng(1);
  const auto s = p.act(x, rng);
  EXPECT_NEAR(s.log_prob, -std::log(5.0), 1e-12);
  EXPECT_NEAR(p.entropy(x), std::log(5.0), 1e-12);
}

TEST(Policy, SaturatedRowDominates) {
  LinearSoftmaxPolicy p({.features = 2, .actions = 4});
  p.weight(2, 0) = 1e3;
  const std::vector<double> x{1, 0};
  EXPECT_GT(p.probabilities(x)[2], 0.999);
}

TEST(Policy, HighTemperatureIsNearUniform) {
  Rng rng(2);
  auto p = random_policy(6, 4, rng);
  PolicySpec spec = p.spec();
  spec.temperature = 1e3;
  LinearSoftmaxPolicy hot(spec);
  std::copy(p.weights().begin(), p.weights().end(), hot.weights().begin());
  const auto x = random_vector(4, rng);
  double kl = 0.0;
  for (double pi : hot.probabilities(x)) kl += pi * std::log(pi * 6.0);
  EXPECT_LT(kl, 1e-3);
}

TEST(Policy, ProbabilitiesSumToOne) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    auto p = random_policy(1 + rng.index(12), 1 + rng.index(10), rng, 20.0);
    const auto x = random_vector(p.spec().features, rng);
    const auto m = random_mask(p.spec().actions, rng);
    const auto probs = p.probabilities(x, m);
    ASSERT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
    for (std::size_t a = 0; a < probs.size(); ++a) {
      if (!m[a]) ASSERT_EQ(probs[a], 0.0);
    }
  }
}

TEST(Policy, SampleLogProbMatches) {
  Rng rng(4);
  auto p = random_policy(7, 5, rng);
  const auto x = random_vector(5, rng);
  for (int i = 0; i < 100; ++i) {
    const auto s = p.act(x, rng);
    ASSERT_NEAR(s.log_prob, p.log_prob(x, s.action), 1e-12);
  }
}

TEST(Policy, InputChecks) {
  LinearSoftmaxPolicy p({.features = 3, .actions = 2});
  Rng rng(1);
  const std::vector<double> short_x{1, 2};
  EXPECT_THROW(p.act(short_x, rng), DimensionMismatch);
  const std::vector<double> x{1, 2, 3};
  const std::vector<std::uint8_t> none{0, 0};
  EXPECT_THROW(p.act(x, rng, none), DomainError);
  const std::vector<std::uint8_t> long_mask{1, 1, 1};
  EXPECT_THROW(p.probabilities(x, long_mask), DimensionMismatch);
  EXPECT_THROW(LinearSoftmaxPolicy({.features = 3, .actions = 2, .temperature = 0.0}), InvalidConfig);
}

// Central differences on log pi, masked and unmasked.
TEST(Gradient, MatchesFiniteDifferences) {
  Rng rng(5);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    auto p = random_policy(4, 6, rng);
    const auto x = random_vector(6, rng);
    const auto mask = inst % 2 ? random_mask(4, rng) : std::vector<std::uint8_t>(4, 1);
    std::size_t a = rng.index(4);
    while (!mask[a]) a = rng.index(4);
    const auto g = p.grad_log_prob(x, a, mask);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double w = p.weights()[k];
      p.weights()[k] = w + eps;
      const double up = p.log_prob(x, a, mask);
      p.weights()[k] = w - eps;
      const double down = p.log_prob(x, a, mask);
      p.weights()[k] = w;
      worst = std::max(worst, std::abs(g[k] - (up - down) / (2 * eps)));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Gradient, EntropyMatchesFiniteDifferences) {
  Rng rng(6);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    auto p = random_policy(4, 6, rng);
    const auto x = random_vector(6, rng);
    std::vector<double> g(p.weights().size(), 0.0);
    p.accumulate_grad_entropy(x, 1.0, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double w = p.weights()[k];
      p.weights()[k] = w + eps;
      const double up = p.entropy(x);
      p.weights()[k] = w - eps;
      const double down = p.entropy(x);
      p.weights()[k] = w;
      worst = std::max(worst, std::abs(g[k] - (up - down) / (2 * eps)));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Returns, DiscountedSums) {
  const std::vector<double> r{1, 2, 3};
  const auto g = returns_to_go(r, 0.5);
  EXPECT_DOUBLE_EQ(g[2], 3.0);
  EXPECT_DOUBLE_EQ(g[1], 3.5);
  EXPECT_DOUBLE_EQ(g[0], 2.75);
}

TEST(Baseline, FirstObservationInitialises) {
  ReturnBaseline b(0.1);
  EXPECT_EQ(b.value(3), 0.0);
  b.observe(3, 10.0);
  EXPECT_EQ(b.value(3), 10.0);
  b.observe(3, 20.0);
  EXPECT_DOUBLE_EQ(b.value(3), 11.0);
}

Trajectory single_step(const std::vector<double>& x, std::size_t a, double reward, std::size_t actions) {
  Trajectory t(x.size(), actions);
  t.set_reward(t.push(x, a), reward);
  return t;
}

TEST(Update, ZeroAdvantageKeepsWeights) {
  LinearSoftmaxPolicy p({.features = 3, .actions = 4, .entropy_coef = 0.0});
  Rng rng(7);
  for (auto& w : p.weights()) w = rng.uniform(-1, 1);
  const auto before = p;
  ReturnBaseline b;
  const std::vector<Trajectory> batch{single_step({1, 0.5, -1}, 2, 0.0, 4)};
  update(p, batch, b);
  EXPECT_EQ(p, before);
}

TEST(Update, PositiveAdvantageRaisesProbability) {
  LinearSoftmaxPolicy p({.features = 3, .actions = 4, .learning_rate = 0.1});
  const std::vector<double> x{1, 0.5, -1};
  const double before = p.probabilities(x)[1];
  ReturnBaseline b;
  const std::vector<Trajectory> batch{single_step(x, 1, 2.0, 4)};
  update(p, batch, b);
  EXPECT_GT(p.probabilities(x)[1], before);
}

TEST(Update, NonFiniteGradientLeavesWeights) {
  LinearSoftmaxPolicy p({.features = 2, .actions = 2});
  const auto before = p;
  ReturnBaseline b;
  const std::vector<Trajectory> batch{single_step({1, 1}, 0, NAN, 2)};
  EXPECT_THROW(update(p, batch, b), NonFiniteGradient);
  EXPECT_EQ(p, before);
}

TEST(Update, RowsStayNormalised) {
  Rng rng(8);
  auto p = random_policy(5, 4, rng);
  ReturnBaseline b;
  for (int round = 0; round < 20; ++round) {
    std::vector<Trajectory> batch;
    for (int n = 0; n < 3; ++n) {
      Trajectory t(4, 5);
      for (int s = 0; s < 10; ++s) {
        const auto x = random_vector(4, rng);
        t.set_reward(t.push(x, p.act(x, rng).action), rng.uniform(-5, 5));
      }
      batch.push_back(std::move(t));
    }
    update(p, batch, b, {.scale = 1.0 / 3, .normalize_advantages = true});
    const auto x = random_vector(4, rng);
    const auto probs = p.probabilities(x);
    ASSERT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Checkpoint, RoundTrip) {
  Rng rng(9);
  auto p = random_policy(3, 5, rng);
  std::stringstream ss;
  p.save(ss);
  EXPECT_EQ(ss.str().rfind("ecofair-policy 1\n3 5 ", 0), 0u);
  auto q = LinearSoftmaxPolicy::load(ss);
  EXPECT_EQ(q.spec().actions, 3u);
  EXPECT_EQ(q.spec().features, 5u);
  EXPECT_EQ(q.spec().temperature, p.spec().temperature);
  for (std::size_t k = 0; k < p.weights().size(); ++k) EXPECT_EQ(q.weights()[k], p.weights()[k]);
  std::stringstream bad("not-a-policy 1\n");
  EXPECT_THROW(LinearSoftmaxPolicy::load(bad), Error);
}

TEST(Features, LayoutContract) {
  const Environment env(test::ring_config());
  const auto s = env.reset(3);
  const auto m = test::current_macro(s, 0);
  for (std::size_t i = 0; i < s.vessels.size(); ++i) {
    const auto x = featurize(env.observe(s, static_cast<VesselId>(i), m));
    ASSERT_EQ(x.size(), kMicroFeatureCount);
    EXPECT_EQ(x[0], 1.0);
    EXPECT_EQ(x[9], 0.0);
    EXPECT_EQ(x[10], 0.0);
    EXPECT_EQ(x[11], 0.0);
    EXPECT_EQ(x[4], 1.0);
    double status = 0.0, weather = 0.0;
    for (int k = 4; k <= 8; ++k) status += x[k];
    for (int k = 12; k <= 14; ++k) weather += x[k];
    EXPECT_EQ(status, 1.0);
    EXPECT_EQ(weather, 1.0);
    for (double v : x) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(MicroActions, EncodeDecode) {
  for (std::size_t i = 0; i < kMicroActionCount; ++i) {
    const auto a = decode_micro_action(i);
    EXPECT_LT(a.speed_level, kSpeedLevels);
    const auto mode = a.detour ? MicroMode::detour : (a.berth_request ? MicroMode::proceed : MicroMode::hold);
    EXPECT_EQ(encode_micro_action(a.speed_level, mode), i);
  }
  EXPECT_TRUE(decode_micro_action(encode_micro_action(3, MicroMode::detour)).detour);
  EXPECT_FALSE(decode_micro_action(encode_micro_action(0, MicroMode::hold)).berth_request);
}

TEST(MicroActions, MaskByStatus) {
  Observation o;
  auto count = [](const std::vector<std::uint8_t>& m) { return std::accumulate(m.begin(), m.end(), 0); };
  o.status = VesselStatus::transit;
  EXPECT_EQ(count(micro_action_mask(o)), 10);
  o.detoured = true;
  EXPECT_EQ(count(micro_action_mask(o)), 5);
  o.status = VesselStatus::ready;
  o.remaining_distance_nm = 100.0;
  EXPECT_EQ(count(micro_action_mask(o)), 5);
  o.remaining_distance_nm = 0.0;
  EXPECT_EQ(count(micro_action_mask(o)), 1);
  o.status = VesselStatus::berthed;
  EXPECT_EQ(count(micro_action_mask(o)), 2);
  o.status = VesselStatus::queued;
  EXPECT_EQ(count(micro_action_mask(o)), 1);
}

TEST(Baselines, Flags) {
  EXPECT_TRUE(configure_baseline(BaselineMode::full).constraints);
  EXPECT_TRUE(configure_baseline(BaselineMode::full).fairness);
  EXPECT_FALSE(configure_baseline(BaselineMode::no_constraints).constraints);
  EXPECT_FALSE(configure_baseline(BaselineMode::no_fairness).fairness);
  const auto flat = configure_baseline(BaselineMode::flat_decentralised);
  EXPECT_FALSE(flat.hierarchy || flat.constraints || flat.fairness);
  const auto hier = configure_baseline(BaselineMode::hier_only);
  EXPECT_TRUE(hier.hierarchy);
  EXPECT_FALSE(hier.constraints || hier.fairness);
  EXPECT_TRUE(configure_baseline(BaselineMode::centralised).centralised);
  for (auto m : {BaselineMode::full, BaselineMode::no_constraints, BaselineMode::no_fairness,
                 BaselineMode::flat_decentralised, BaselineMode::centralised, BaselineMode::hier_only}) {
    EXPECT_EQ(parse_baseline_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_baseline_mode("qmix"), InvalidConfig);
}

TEST(Centralised, RotatedConcatenation) {
  std::vector<std::vector<double>> blocks(3, std::vector<double>(kMicroFeatureCount));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < kMicroFeatureCount; ++k) blocks[i][k] = 100.0 * i + k;
  }
  const auto x = centralised_features(blocks, 1);
  ASSERT_EQ(x.size(), 3 * kMicroFeatureCount);
  EXPECT_EQ(x[0], 100.0);
  EXPECT_EQ(x[kMicroFeatureCount], 200.0);
  EXPECT_EQ(x[2 * kMicroFeatureCount], 0.0);
}

}  // namespace
}  // namespace ecofair
