#include "ecofair/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ecofair/error.hpp"

namespace ecofair {

int macro_index(int t, int tau_h) {
  if (t < 0) throw DomainError("negative step");
  if (tau_h < 1) throw DomainError("tau_h must be >= 1");
  return t / tau_h;
}

MacroClock::MacroClock(int tau, int T) : tau_h(tau), horizon(T) {
  if (T < 1) throw InvalidConfig("horizon must be >= 1");
  if (tau < 1 || tau > T) throw InvalidConfig("tau_h must lie in [1, horizon]");
}

int MacroClock::epoch_length(int k) const {
  const int start = k * tau_h;
  return std::max(0, std::min(tau_h, horizon - start));
}

HighLevelContext summarize(const Environment& env, const FleetState& state, const MacroClock& clock,
                           double budget_kg, double phi) {
  HighLevelContext c;
  c.t = state.t;
  c.horizon = clock.horizon;
  for (const auto& p : state.ports) {
    const double r = static_cast<double>(p.berth_queue.size()) / p.spec.berth_capacity;
    c.mean_queue_ratio += r;
    c.max_queue_ratio = std::max(c.max_queue_ratio, r);
  }
  if (!state.ports.empty()) c.mean_queue_ratio /= static_cast<double>(state.ports.size());
  c.emissions = state.cumulative_emissions;
  c.budget = budget_kg;
  if (budget_kg > 0.0) {
    const int left = std::max(1, clock.horizon - state.t);
    const int len = clock.epoch_length(clock.epoch(std::min(state.t, clock.horizon - 1)));
    c.window_budget = std::max(0.0, budget_kg - state.cumulative_emissions) * std::min(1.0, double(len) / left);
  }
  for (auto s : state.weather.region) {
    if (s == Scenario::storm) c.storm_fraction += 1.0 / kRegionCount;
    if (s == Scenario::swell) c.swell_fraction += 1.0 / kRegionCount;
  }
  c.phi = phi;
  if (!state.cumulative_cost.empty()) {
    c.mean_cost = std::accumulate(state.cumulative_cost.begin(), state.cumulative_cost.end(), 0.0) /
                  static_cast<double>(state.cumulative_cost.size());
  }
  (void)env;
  return c;
}

std::vector<VesselLeg> vessel_legs(const Environment& env, const FleetState& state) {
  std::vector<VesselLeg> legs(state.vessels.size());
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const auto& v = state.vessels[i];
    auto& leg = legs[i];
    leg.vessel = static_cast<VesselId>(i);
    leg.job = v.job;
    leg.status = v.status;
    leg.v_ref = v.spec.v_ref;
    leg.hull_coefficient = v.spec.hull_coefficient;
    leg.cost = state.cumulative_cost[i];
    leg.active_route_id = v.directive.route_id;
    leg.job_started = v.job_started;
    leg.active = v.directive;
    leg.remaining_distance_nm = env.remaining_distance(v);
    if (v.status == VesselStatus::transit) {
      leg.has_destination = true;
      leg.candidates = {v.route};
    } else if (v.status == VesselStatus::ready && v.destination != v.port) {
      leg.has_destination = true;
      leg.candidates = env.routes().candidates(v.port, v.destination);
      if (leg.candidates.empty()) {
        throw EmptyRouteSet("no route from port " + std::to_string(v.port) + " to " + std::to_string(v.destination));
      }
    }
  }
  return legs;
}

std::vector<double> macro_features(const HighLevelContext& ctx, const VesselLeg& leg, const MacroClock& clock,
                                   const MacroSettings& settings) {
  std::vector<double> x(kMacroFeatureCount, 0.0);
  x[0] = 1.0;
  x[1] = ctx.mean_queue_ratio;
  x[2] = ctx.max_queue_ratio;
  if (ctx.budget > 0.0) x[3] = std::clamp(ctx.emissions / ctx.budget, 0.0, 2.0);
  x[4] = static_cast<double>(ctx.t) / ctx.horizon;
  x[5] = ctx.storm_fraction;
  x[6] = ctx.swell_fraction;
  x[7] = ctx.phi;
  if (ctx.mean_cost > 0.0) x[8] = std::clamp(leg.cost / ctx.mean_cost - 1.0, -1.0, 3.0);
  x[9] = settings.hull_reference > 0.0 ? leg.hull_coefficient / settings.hull_reference : 0.0;
  x[10] = leg.status == VesselStatus::ready ? 1.0 : 0.0;
  x[11] = leg.status == VesselStatus::transit ? 1.0 : 0.0;
  if (leg.status == VesselStatus::ready && !leg.candidates.empty()) {
    const double shortest = leg.candidates.front().distance_nm;
    for (std::size_t j = 0; j < std::min<std::size_t>(3, leg.candidates.size()); ++j) {
      x[12 + j] = leg.candidates[j].distance_nm / shortest - 1.0;
    }
  }
  x[15] = std::clamp(leg.remaining_distance_nm / (leg.v_ref * clock.tau_h), 0.0, 2.0);
  return x;
}

namespace {

std::size_t zero_offset_index(const MacroSettings& s) {
  auto it = std::find(s.window_offsets.begin(), s.window_offsets.end(), 0);
  return it == s.window_offsets.end() ? 0 : static_cast<std::size_t>(it - s.window_offsets.begin());
}

void check_settings(const MacroSettings& s) {
  if (s.route_candidates < 1) throw InvalidConfig("route_candidates must be >= 1");
  if (s.window_offsets.empty()) throw InvalidConfig("window_offsets must not be empty");
  if (s.window_slack < 0) throw InvalidConfig("window_slack must be >= 0");
}

double forecast_distance(const VesselLeg& leg, double route_distance, int tau_h) {
  if (!leg.has_destination) return 0.0;
  return std::min(route_distance, leg.v_ref * tau_h);
}

VesselDirective make_directive(const VesselLeg& leg, std::size_t route, int offset, const HighLevelContext& ctx,
                               const MacroSettings& settings, double& distance) {
  VesselDirective d;
  d.job = leg.job;
  if (!leg.has_destination) {
    d.route_id = 0;
    d.window_offset = 0;
    d.window_start = d.window_end = ctx.t;
    distance = 0.0;
    return d;
  }
  if (leg.status == VesselStatus::transit) {
    d = leg.active;
    d.job = leg.job;
    distance = leg.remaining_distance_nm;
    return d;
  }
  const Route& r = leg.candidates[route];
  d.route = r.ports;
  d.route_id = static_cast<int>(route);
  d.window_offset = offset;
  const int eta = static_cast<int>(std::ceil(r.distance_nm / leg.v_ref - 1e-9));
  const int target = leg.job_started + eta + offset;
  d.window_start = std::clamp(target - settings.window_slack, leg.job_started, ctx.horizon);
  d.window_end = std::clamp(target + settings.window_slack, leg.job_started, ctx.horizon);
  const double remaining = r.distance_nm;
  distance = remaining;
  return d;
}

}  // namespace

std::vector<std::uint8_t> macro_action_mask(const VesselLeg& leg, const MacroSettings& settings) {
  check_settings(settings);
  const auto offsets = settings.window_offsets.size();
  std::vector<std::uint8_t> mask(settings.action_count(), 0);
  if (!leg.has_destination || leg.status != VesselStatus::ready) {
    mask[zero_offset_index(settings)] = 1;
    return mask;
  }
  const auto routes = std::min(leg.candidates.size(), settings.route_candidates);
  if (routes == 0) throw EmptyRouteSet("vessel " + std::to_string(leg.vessel) + " has no candidate route");
  for (std::size_t r = 0; r < routes; ++r) {
    for (std::size_t o = 0; o < offsets; ++o) mask[r * offsets + o] = 1;
  }
  return mask;
}

MacroDecision macro_decide(const LinearSoftmaxPolicy& policy, const HighLevelContext& ctx,
                           std::span<const VesselLeg> legs, const MacroClock& clock, const MacroSettings& settings,
                           Rng& rng) {
  check_settings(settings);
  if (policy.spec().actions != settings.action_count()) {
    throw DimensionMismatch("macro policy has " + std::to_string(policy.spec().actions) + " actions, settings need " +
                            std::to_string(settings.action_count()));
  }
  MacroDecision out;
  out.action.epoch = clock.epoch(ctx.t);
  out.action.issued_at = ctx.t;
  out.action.directives.reserve(legs.size());
  out.samples.reserve(legs.size());
  std::vector<double> forecast;
  forecast.reserve(legs.size());
  const auto offsets = settings.window_offsets.size();

  for (const auto& leg : legs) {
    MacroSample s;
    s.features = macro_features(ctx, leg, clock, settings);
    s.mask = macro_action_mask(leg, settings);
    s.forced = std::count(s.mask.begin(), s.mask.end(), std::uint8_t{1}) == 1;
    if (s.forced) {
      s.action = static_cast<std::size_t>(std::find(s.mask.begin(), s.mask.end(), std::uint8_t{1}) - s.mask.begin());
      s.log_prob = 0.0;
    } else {
      const auto a = policy.act(s.features, rng, s.mask);
      s.action = a.action;
      s.log_prob = a.log_prob;
    }
    double distance = 0.0;
    out.action.directives.push_back(make_directive(leg, s.action / offsets, settings.window_offsets[s.action % offsets],
                                                   ctx, settings, distance));
    forecast.push_back(forecast_distance(leg, distance, clock.tau_h));
    out.samples.push_back(std::move(s));
  }
  const auto env = allocate_budget(ctx.window_budget, forecast);
  for (std::size_t i = 0; i < env.size(); ++i) out.action.directives[i].envelope = env[i];
  return out;
}

MacroAction default_macro(std::span<const VesselLeg> legs, const HighLevelContext& ctx, const MacroClock& clock,
                          const MacroSettings& settings) {
  check_settings(settings);
  MacroAction m;
  m.epoch = clock.epoch(ctx.t);
  m.issued_at = ctx.t;
  for (const auto& leg : legs) {
    double distance = 0.0;
    m.directives.push_back(make_directive(leg, 0, 0, ctx, settings, distance));
  }
  const std::vector<double> zeros(legs.size(), 0.0);
  const auto env = allocate_budget(ctx.window_budget, zeros);
  for (std::size_t i = 0; i < env.size(); ++i) m.directives[i].envelope = env[i];
  return m;
}

std::vector<double> allocate_budget(double budget, std::span<const double> distances) {
  if (!(budget >= 0.0)) throw DomainError("budget must be >= 0");
  const auto n = distances.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  double total = 0.0;
  for (double d : distances) {
    if (!(d >= 0.0)) throw DomainError("distance must be >= 0");
    total += d;
  }
  double assigned = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out[i] = total > 0.0 ? budget * (distances[i] / total) : budget / static_cast<double>(n);
    assigned += out[i];
  }
  out[n - 1] = std::max(0.0, budget - assigned);
  // Summed in order, the envelopes must not round above the budget.
  auto sum = [&out] { return std::accumulate(out.begin(), out.end(), 0.0); };
  for (std::size_t i = n; i-- > 0;) {
    if (double s = sum(); s > budget) out[i] = std::max(0.0, out[i] - (s - budget));
    while (sum() > budget && out[i] > 0.0) out[i] = std::nextafter(out[i], 0.0);
    if (sum() <= budget) break;
  }
  return out;
}

MicroDecision micro_decide(const LinearSoftmaxPolicy& policy, const Observation& obs, const FeatureScales& scales,
                           Rng& rng) {
  MicroDecision d;
  d.features = featurize(obs, scales);
  d.mask = micro_action_mask(obs);
  const auto a = policy.act(d.features, rng, d.mask);
  d.index = a.action;
  d.log_prob = a.log_prob;
  d.action = decode_micro_action(a.action);
  return d;
}

double adapt_cap(double budget, double episode_gini, double zeta, bool feasible, const CapAdaptation& mode) {
  if (!(budget > 0.0)) throw DomainError("cap must be positive");
  if (!mode.enabled) return budget;
  if (!feasible) return budget * (1.0 + mode.delta);
  if (episode_gini <= zeta) return budget * (1.0 - mode.delta);
  return budget;
}

}  // namespace ecofair
