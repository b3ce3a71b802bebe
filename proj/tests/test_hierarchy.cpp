#include <gtest/gtest.h>

#include <array>
#include <numeric>

#include "ecofair/error.hpp"
#include "ecofair/hierarchy.hpp"
#include "fixtures.hpp"

namespace ecofair {
namespace {

Route fake_route(double nm, PortId via) {
  Route r;
  r.ports = {0, via, 1};
  r.lanes = {0, 1};
  r.distance_nm = nm;
  return r;
}

VesselLeg ready_leg(std::size_t routes) {
  VesselLeg leg;
  leg.status = VesselStatus::ready;
  leg.has_destination = true;
  leg.v_ref = 10.0;
  leg.remaining_distance_nm = 100.0;
  for (std::size_t r = 0; r < routes; ++r) leg.candidates.push_back(fake_route(100.0 + 20.0 * r, 5 + r));
  return leg;
}

HighLevelContext context(double window_budget = 90.0) {
  HighLevelContext c;
  c.t = 0;
  c.horizon = 50;
  c.window_budget = window_budget;
  return c;
}

LinearSoftmaxPolicy macro_policy(const MacroSettings& s) {
  return LinearSoftmaxPolicy({.features = kMacroFeatureCount, .actions = s.action_count()});
}

TEST(Clock, MacroIndex) {
  EXPECT_EQ(macro_index(0, 10), 0);
  EXPECT_EQ(macro_index(9, 10), 0);
  EXPECT_EQ(macro_index(10, 10), 1);
}

TEST(Clock, EpochsAndLengths) {
  const MacroClock c(10, 45);
  EXPECT_EQ(c.epochs(), 5);
  EXPECT_EQ(c.epoch_length(0), 10);
  EXPECT_EQ(c.epoch_length(4), 5);
  EXPECT_TRUE(c.boundary(20));
  EXPECT_FALSE(c.boundary(21));
  EXPECT_THROW(MacroClock(0, 10), InvalidConfig);
  EXPECT_THROW(MacroClock(11, 10), InvalidConfig);
}

TEST(Allocate, Examples) {
  EXPECT_EQ(allocate_budget(100, std::vector<double>{1, 1}), (std::vector<double>{50, 50}));
  EXPECT_EQ(allocate_budget(100, std::vector<double>{3, 1}), (std::vector<double>{75, 25}));
  const auto eq = allocate_budget(100, std::vector<double>{0, 0, 0});
  for (double e : eq) EXPECT_NEAR(e, 100.0 / 3, 1e-12);
  EXPECT_LE(std::accumulate(eq.begin(), eq.end(), 0.0), 100.0);
  EXPECT_NEAR(std::accumulate(eq.begin(), eq.end(), 0.0), 100.0, 1e-12);
  EXPECT_THROW(allocate_budget(-1, std::vector<double>{1}), DomainError);
  EXPECT_THROW(allocate_budget(1, std::vector<double>{1, -2}), DomainError);
}

TEST(Allocate, NeverExceedsBudget) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> d(1 + rng.index(60));
    for (auto& x : d) x = rng.bernoulli(0.1) ? 0.0 : rng.uniform(0, 1e4);
    const double b = rng.uniform(0, 1e7);
    const auto e = allocate_budget(b, d);
    double sum = 0.0;
    for (double x : e) {
      ASSERT_GE(x, 0.0);
      sum += x;
    }
    ASSERT_LE(sum, b);
    ASSERT_NEAR(sum, b, 1e-9 * std::max(1.0, b));
  }
}

TEST(AdaptCap, Rule) {
  const CapAdaptation on{true, 0.02};
  EXPECT_DOUBLE_EQ(adapt_cap(1000, 0.2, 0.25, true, on), 980.0);
  EXPECT_DOUBLE_EQ(adapt_cap(1000, 0.2, 0.25, false, on), 1020.0);
  EXPECT_DOUBLE_EQ(adapt_cap(1000, 0.3, 0.25, true, on), 1000.0);
  EXPECT_DOUBLE_EQ(adapt_cap(1000, 0.2, 0.25, true, CapAdaptation{}), 1000.0);
}

TEST(MacroDecide, OneHotPolicyIsDeterministic) {
  const MacroSettings s;
  auto p = macro_policy(s);
  p.weight(7, 0) = 1e4;
  const std::vector<VesselLeg> legs{ready_leg(3), ready_leg(3)};
  const MacroClock clock(10, 50);
  Rng a(1), b(2);
  const auto x = macro_decide(p, context(), legs, clock, s, a);
  const auto y = macro_decide(p, context(), legs, clock, s, b);
  EXPECT_EQ(x.action, y.action);
  EXPECT_EQ(x.samples[0].action, 7u);
  EXPECT_EQ(x.action.directives[0].route_id, 1);
  EXPECT_EQ(x.action.directives[0].window_offset, s.window_offsets[3]);
}

TEST(MacroDecide, SingleCandidateForcesRoute) {
  const MacroSettings s;
  auto p = macro_policy(s);
  for (std::size_t o = 4; o < s.action_count(); ++o) p.weight(o, 0) = 50.0;
  const std::vector<VesselLeg> legs{ready_leg(1)};
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto d = macro_decide(p, context(), legs, MacroClock(10, 50), s, rng);
    ASSERT_EQ(d.action.directives[0].route_id, 0);
  }
}

TEST(MacroDecide, UniformPolicyRouteFrequencies) {
  const MacroSettings s;
  const auto p = macro_policy(s);
  const std::vector<VesselLeg> legs{ready_leg(3)};
  Rng rng(4);
  std::array<int, 3> counts{};
  for (int i = 0; i < 30000; ++i) {
    const auto d = macro_decide(p, context(), legs, MacroClock(10, 50), s, rng);
    ++counts[static_cast<std::size_t>(d.action.directives[0].route_id)];
  }
  for (int c : counts) EXPECT_NEAR(c / 30000.0, 1.0 / 3, 0.02);
}

TEST(MacroDecide, EnvelopesAndWindows) {
  const MacroSettings s;
  const auto p = macro_policy(s);
  std::vector<VesselLeg> legs{ready_leg(3), ready_leg(2), VesselLeg{}, ready_leg(3)};
  legs[3].job_started = 45;
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    auto ctx = context(rng.uniform(0, 1e5));
    ctx.t = 45;
    const auto d = macro_decide(p, ctx, legs, MacroClock(10, 50), s, rng);
    double sum = 0.0;
    for (const auto& dir : d.action.directives) {
      sum += dir.envelope;
      ASSERT_LE(dir.window_start, dir.window_end);
      ASSERT_LE(dir.window_end, ctx.horizon);
    }
    ASSERT_LE(sum, ctx.window_budget);
    ASSERT_TRUE(d.samples[2].forced);
    ASSERT_EQ(d.action.directives[2].envelope, 0.0);
  }
}

TEST(MacroDecide, WindowAnchoredAtJobStart) {
  MacroSettings s;
  s.window_offsets = {4};
  const auto p = macro_policy(s);
  auto leg = ready_leg(1);
  leg.job_started = 3;
  const std::vector<VesselLeg> legs{leg};
  auto ctx = context();
  ctx.t = 20;
  Rng rng(6);
  const auto d = macro_decide(p, ctx, legs, MacroClock(10, 50), s, rng);
  // eta = 100 nm / 10 kn = 10 steps; target 3 + 10 + 4.
  EXPECT_EQ(d.action.directives[0].window_start, 15);
  EXPECT_EQ(d.action.directives[0].window_end, 19);
}

TEST(MacroDecide, TransitKeepsActiveDirective) {
  const MacroSettings s;
  const auto p = macro_policy(s);
  auto leg = ready_leg(1);
  leg.status = VesselStatus::transit;
  leg.active.route = {0, 9, 1};
  leg.active.window_start = 7;
  leg.active.window_end = 11;
  const std::vector<VesselLeg> legs{leg};
  Rng rng(7);
  const auto d = macro_decide(p, context(), legs, MacroClock(10, 50), s, rng);
  EXPECT_TRUE(d.samples[0].forced);
  EXPECT_EQ(d.action.directives[0].route, leg.active.route);
  EXPECT_EQ(d.action.directives[0].window_end, 11);
}

TEST(MacroDecide, RejectsWrongPolicyShape) {
  const MacroSettings s;
  const LinearSoftmaxPolicy p({.features = kMacroFeatureCount, .actions = 3});
  const std::vector<VesselLeg> legs{ready_leg(3)};
  Rng rng(8);
  EXPECT_THROW(macro_decide(p, context(), legs, MacroClock(10, 50), s, rng), DimensionMismatch);
}

TEST(VesselLegs, ReadyVesselsHaveCandidates) {
  const Environment env(test::ring_config());
  const auto st = env.reset(2);
  const auto legs = vessel_legs(env, st);
  ASSERT_EQ(legs.size(), st.vessels.size());
  for (const auto& l : legs) {
    EXPECT_TRUE(l.has_destination);
    EXPECT_FALSE(l.candidates.empty());
    EXPECT_LE(l.candidates.size(), 3u);
  }
}

LinearSoftmaxPolicy micro_policy() {
  return LinearSoftmaxPolicy({.features = kMicroFeatureCount, .actions = kMicroActionCount});
}

TEST(MicroDecide, OneHotIsDeterministic) {
  auto p = micro_policy();
  p.weight(encode_micro_action(2, MicroMode::proceed), 0) = 1e4;
  Observation o;
  o.status = VesselStatus::transit;
  o.v_ref = o.v_max = o.max_speed = 10;
  Rng rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(micro_decide(p, o, {}, rng).action.speed_level, 2u);
}

TEST(MicroDecide, ZeroWeightsUniformOverMask) {
  const auto p = micro_policy();
  const std::vector<double> zeros(kMicroFeatureCount, 0.0);
  for (double pi : p.probabilities(zeros)) EXPECT_DOUBLE_EQ(pi, 1.0 / kMicroActionCount);
}

// The low-level distribution depends on the agent's own observation only.
TEST(MicroDecide, DecentralisedExecution) {
  const Environment env(test::ring_config(8));
  auto s = env.reset(5);
  Rng rng(9);
  auto p = micro_policy();
  for (auto& w : p.weights()) w = rng.uniform(-1, 1);
  const auto m = test::current_macro(s, 0);
  const FeatureScales scales;
  auto dist = [&](const FleetState& st, VesselId i) {
    const auto o = env.observe(st, i, m);
    return p.probabilities(featurize(o, scales), micro_action_mask(o));
  };
  const auto before = dist(s, 0);
  for (std::size_t i = 1; i < s.vessels.size(); ++i) {
    if (s.vessels[i].port == s.vessels[0].port) continue;
    s.vessels[i].fuel_level = 1.0;
    s.vessels[i].healthy = false;
    s.vessels[i].speed = 12.0;
    s.cumulative_cost[i] = 1e4;
  }
  EXPECT_EQ(dist(s, 0), before);
}

TEST(MicroDecide, SharedParametersSameDistribution) {
  Rng rng(10);
  auto p = micro_policy();
  for (auto& w : p.weights()) w = rng.uniform(-1, 1);
  Observation a;
  a.status = VesselStatus::transit;
  a.v_ref = a.v_max = a.max_speed = 14;
  a.remaining_distance_nm = 50;
  Observation b = a;
  b.agent = 7;
  EXPECT_EQ(p.probabilities(featurize(a), micro_action_mask(a)), p.probabilities(featurize(b), micro_action_mask(b)));
}

TEST(Summarize, WindowBudgetShare) {
  const Environment env(test::ring_config());
  auto s = env.reset(1);
  const MacroClock clock(10, 50);
  const auto c0 = summarize(env, s, clock, 1000.0, 0.0);
  EXPECT_DOUBLE_EQ(c0.window_budget, 200.0);
  s.cumulative_emissions = 1200.0;
  EXPECT_EQ(summarize(env, s, clock, 1000.0, 0.0).window_budget, 0.0);
}

}  // namespace
}  // namespace ecofair
