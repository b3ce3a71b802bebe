#include "ecofair/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "ecofair/error.hpp"

namespace ecofair {

namespace {

constexpr int kNoWindow = std::numeric_limits<int>::max() / 2;

bool contains(std::span<const VesselId> ids, VesselId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::uint64_t macro_signature(const MacroAction& macro) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(macro.epoch));
  auto mix = [&h](std::uint64_t x) { h = splitmix64(h ^ x); };
  for (const auto& d : macro.directives) {
    mix(d.job);
    mix(static_cast<std::uint64_t>(d.route_id));
    for (PortId p : d.route) mix(static_cast<std::uint64_t>(p));
    mix(static_cast<std::uint64_t>(d.window_start));
    mix(static_cast<std::uint64_t>(d.window_end));
    std::uint64_t bits = 0;
    static_assert(sizeof(bits) == sizeof(d.envelope));
    std::memcpy(&bits, &d.envelope, sizeof(bits));
    mix(bits);
  }
  return h;
}

Scenario milder(Scenario s) {
  return s == Scenario::storm ? Scenario::swell : Scenario::calm;
}

}  // namespace

WeatherConditions conditions(const WeatherModel& model, Scenario s) {
  const auto i = static_cast<std::size_t>(s);
  return {s, model.speed_multiplier[i], model.fuel_multiplier[i]};
}

const char* to_string(VesselStatus s) {
  switch (s) {
    case VesselStatus::ready: return "ready";
    case VesselStatus::transit: return "transit";
    case VesselStatus::anchored: return "anchored";
    case VesselStatus::queued: return "queued";
    case VesselStatus::berthed: return "berthed";
  }
  return "?";
}

QueueOutcome queue_step(Port& port, std::span<const VesselId> arrivals, std::span<const VesselId> crane_holds) {
  QueueOutcome out;
  const int berth_cap = port.spec.berth_capacity;
  const int crane_cap = port.spec.crane_capacity;

  for (VesselId v : arrivals) port.berth_queue.push_back(v);

  out.berth_demand = static_cast<int>(port.berthed.size() + port.berth_queue.size());
  out.berth_overflow = std::max(0, out.berth_demand - berth_cap);

  while (static_cast<int>(port.berthed.size()) < berth_cap && !port.berth_queue.empty()) {
    const VesselId v = port.berth_queue.front();
    port.berth_queue.pop_front();
    port.berthed.push_back({v, port.spec.service_hours_per_call});
    out.served.push_back(v);
  }
  out.waiting.assign(port.berth_queue.begin(), port.berth_queue.end());

  port.crane_queue.clear();
  for (auto& slot : port.berthed) {
    if (slot.remaining_hours <= 0 || contains(crane_holds, slot.vessel)) continue;
    ++out.crane_demand;
    if (out.cranes_used < crane_cap) {
      ++out.cranes_used;
      --slot.remaining_hours;
    } else {
      port.crane_queue.push_back(slot.vessel);
    }
  }
  out.crane_overflow = std::max(0, out.crane_demand - crane_cap);
  for (const auto& slot : port.berthed) {
    if (slot.remaining_hours > 0 && contains(crane_holds, slot.vessel)) out.crane_waiting.push_back(slot.vessel);
  }
  out.crane_waiting.insert(out.crane_waiting.end(), port.crane_queue.begin(), port.crane_queue.end());

  std::erase_if(port.berthed, [&](const BerthSlot& slot) {
    if (slot.remaining_hours > 0) return false;
    out.completed.push_back(slot.vessel);
    return true;
  });
  return out;
}

double fuel_rate(const Vessel& vessel, double speed, const WeatherConditions& weather, double idle_fraction) {
  if (!(speed >= 0.0)) throw DomainError("speed must be >= 0");
  if (speed > vessel.max_speed * (1.0 + 1e-12)) {
    throw DomainError("speed " + std::to_string(speed) + " exceeds current max " + std::to_string(vessel.max_speed));
  }
  const double k = vessel.spec.hull_coefficient;
  if (speed == 0.0) return idle_fraction * k;
  const double ratio = speed / vessel.spec.v_ref;
  return k * ratio * ratio * ratio * weather.fuel_multiplier;
}

WeatherState sample_weather(const WeatherState& current, const WeatherModel& model, Rng& rng) {
  model.validate();
  WeatherState next;
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    const auto& row = model.transition[static_cast<std::size_t>(current.region[r])];
    next.region[r] = static_cast<Scenario>(rng.categorical(row));
  }
  return next;
}

Environment::Environment(EnvConfig config, EnvOptions options)
    : config_(std::move(config)), options_(options) {
  validate(config_);
  if (options_.route_candidates < 1) throw InvalidConfig("route_candidates must be >= 1");
  if (options_.window_slack < 0) throw InvalidConfig("window_slack must be >= 0");
  network_ = PortNetwork(config_.ports, config_.lanes);
  routes_ = RouteTable(network_, options_.route_candidates);

  job_targets_.resize(network_.port_count());
  for (std::size_t p = 0; p < network_.port_count(); ++p) {
    const auto hops = network_.hop_counts(static_cast<PortId>(p));
    for (std::size_t q = 0; q < hops.size(); ++q) {
      if (hops[q] >= 1 && hops[q] <= config_.job_max_hops) job_targets_[p].push_back(static_cast<PortId>(q));
    }
  }

  const double worst = config_.weather.worst_fuel_multiplier();
  double bound = 0.0;
  for (const auto& v : config_.vessels) {
    const double ratio = v.v_max / v.v_ref;
    const double moving = v.hull_coefficient * ratio * ratio * ratio * worst;
    bound += std::max(moving, config_.idle_fraction * v.hull_coefficient);
  }
  bound *= config_.carbon_factor;
  if (config_.emission_bound) {
    if (*config_.emission_bound < bound * (1.0 - 1e-12)) {
      throw InvalidConfig("emission_bound " + std::to_string(*config_.emission_bound) +
                          " is below the fleet maximum " + std::to_string(bound));
    }
    bound = *config_.emission_bound;
  }
  emission_bound_ = bound;
}

int Environment::nominal_eta(const Vessel& vessel, double distance_nm) {
  return static_cast<int>(std::ceil(distance_nm / vessel.spec.v_ref - 1e-9));
}

void Environment::assign_job(FleetState& state, Vessel& vessel) const {
  ++vessel.job;
  vessel.job_started = state.t;
  const auto& targets = job_targets_[static_cast<std::size_t>(vessel.port)];
  VesselDirective d;
  d.job = vessel.job;
  d.envelope = vessel.directive.envelope;
  if (targets.empty()) {
    vessel.destination = vessel.port;
    d.route = {vessel.port};
    d.window_start = state.t;
    d.window_end = kNoWindow;
  } else {
    vessel.destination = targets[state.rng.index(targets.size())];
    const auto& cands = routes_.candidates(vessel.port, vessel.destination);
    d.route = cands.front().ports;
    const int eta = nominal_eta(vessel, cands.front().distance_nm);
    d.window_start = state.t + eta - options_.window_slack;
    d.window_end = state.t + eta + options_.window_slack;
  }
  vessel.directive = std::move(d);
}

FleetState Environment::reset(std::uint64_t seed) const {
  FleetState s;
  s.rng = Rng(seed);
  const auto n = vessel_count();
  s.ports.reserve(network_.port_count());
  for (const auto& spec : network_.ports()) {
    Port p;
    p.spec = spec;
    s.ports.push_back(std::move(p));
  }
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    s.weather.region[r] = static_cast<Scenario>(s.rng.categorical(config_.weather.initial));
  }
  s.vessels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = s.vessels[i];
    v.spec = config_.vessels[i];
    v.fuel_level = v.spec.fuel_capacity;
    v.max_speed = v.spec.v_max;
    v.port = v.spec.start;
    v.status = VesselStatus::ready;
    assign_job(s, v);
  }
  s.cumulative_cost.assign(n, 0.0);
  s.waiting_hours.assign(n, 0.0);
  return s;
}

void Environment::apply_macro(FleetState& state, const MacroAction& macro) const {
  if (macro.directives.size() != vessel_count()) {
    throw DimensionMismatch("macro-action has " + std::to_string(macro.directives.size()) +
                            " directives for " + std::to_string(vessel_count()) + " vessels");
  }
  const auto signature = macro_signature(macro);
  if (macro.epoch == state.applied_epoch) {
    if (signature != state.applied_macro_signature) {
      throw InvariantViolation("macro-action changed within epoch " + std::to_string(macro.epoch));
    }
    return;
  }
  if (macro.epoch < state.applied_epoch) {
    throw InvariantViolation("macro epoch went backwards");
  }
  state.applied_macro_signature = signature;
  for (std::size_t i = 0; i < vessel_count(); ++i) {
    auto& v = state.vessels[i];
    const auto& d = macro.directives[i];
    v.window_emissions = 0.0;
    v.directive.envelope = d.envelope;
    if (d.job == v.job) v.directive = d;
  }
  state.applied_epoch = macro.epoch;
}

void Environment::depart(Vessel& v) const {
  const auto& cands = routes_.candidates(v.port, v.destination);
  const Route* chosen = &cands.front();
  for (const auto& r : cands) {
    if (r.ports == v.directive.route) {
      chosen = &r;
      break;
    }
  }
  v.route = *chosen;
  v.leg = 0;
  v.lane_progress_nm = 0.0;
  v.lane_length_nm = network_.lane(v.route.lanes.front()).distance_nm;
  v.detoured = false;
  v.status = VesselStatus::transit;
}

LaneClass Environment::region_of(const Vessel& v) const {
  if (v.status == VesselStatus::transit) return network_.lane(v.route.lanes[v.leg]).region;
  return LaneClass::coastal;
}

WeatherConditions Environment::local_weather(const FleetState& state, const Vessel& v) const {
  Scenario s = state.weather.region[static_cast<std::size_t>(region_of(v))];
  if (v.status == VesselStatus::transit && v.detoured) s = milder(s);
  return conditions(config_.weather, s);
}

double Environment::remaining_distance(const Vessel& v) const {
  if (v.status == VesselStatus::transit) {
    double d = v.lane_length_nm - v.lane_progress_nm;
    for (std::size_t l = v.leg + 1; l < v.route.lanes.size(); ++l) d += network_.lane(v.route.lanes[l]).distance_nm;
    return d;
  }
  if (v.status == VesselStatus::ready && v.destination != v.port) {
    const auto& cands = routes_.candidates(v.port, v.destination);
    for (const auto& r : cands) {
      if (r.ports == v.directive.route) return r.distance_nm;
    }
    return cands.front().distance_nm;
  }
  return 0.0;
}

PortId Environment::local_port(const Vessel& v) const {
  if (v.status == VesselStatus::transit) return network_.lane(v.route.lanes[v.leg]).to;
  return v.port;
}

StepResult Environment::step(FleetState& state, std::span<const MicroAction> micro, const MacroAction& macro) const {
  const auto n = vessel_count();
  if (micro.size() != n) {
    throw DimensionMismatch("got " + std::to_string(micro.size()) + " micro-actions for " + std::to_string(n) +
                            " vessels");
  }
  for (const auto& a : micro) {
    if (a.speed_level >= kSpeedLevels) throw DomainError("speed level outside the speed grid");
  }
  apply_macro(state, macro);

  const int t = state.t;
  StepResult result;
  auto& m = result.metrics;
  m.vessel_emissions.assign(n, 0.0);
  m.fuel.assign(n, 0.0);
  m.cost.assign(n, 0.0);
  m.raw_reward.assign(n, 0.0);
  m.berth_overflow.assign(port_count(), 0);
  m.crane_overflow.assign(port_count(), 0);
  m.berth_occupancy.assign(port_count(), 0);
  m.crane_occupancy.assign(port_count(), 0);
  std::vector<double> waiting(n, 0.0);

  // Speeds, departures and fuel burn for the hour.
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = state.vessels[i];
    const auto& a = micro[i];
    double speed = 0.0;
    if (v.status == VesselStatus::ready || v.status == VesselStatus::transit) {
      speed = std::min(config_.speed_grid[a.speed_level] * v.spec.v_max, v.max_speed);
    }
    if (v.status == VesselStatus::ready && (speed <= 0.0 || v.destination == v.port)) speed = 0.0;
    if (v.status == VesselStatus::ready && speed > 0.0) depart(v);

    auto weather = local_weather(state, v);
    double burn = fuel_rate(v, speed, weather, config_.idle_fraction);
    if (burn > v.fuel_level) {
      // Drop to the fastest affordable grid speed; a dry tank drifts.
      std::size_t level = a.speed_level;
      while (level > 0 && burn > v.fuel_level) {
        --level;
        speed = std::min(config_.speed_grid[level] * v.spec.v_max, v.max_speed);
        burn = fuel_rate(v, speed, weather, config_.idle_fraction);
      }
      burn = std::min(burn, v.fuel_level);
    }
    v.fuel_level = std::max(0.0, v.fuel_level - burn);
    v.speed = speed;
    m.fuel[i] = burn;
    m.vessel_emissions[i] = burn * config_.carbon_factor;
  }

  // Movement along lanes; arrivals drop anchor at their destination.
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = state.vessels[i];
    if (v.status != VesselStatus::transit) continue;
    if (micro[i].detour && !v.detoured) {
      v.detoured = true;
      v.lane_length_nm += (v.lane_length_nm - v.lane_progress_nm) * (config_.detour_distance_factor - 1.0);
    }
    const double effective = v.speed * local_weather(state, v).speed_multiplier;
    double travel = effective;
    while (travel > 0.0) {
      const double remain = v.lane_length_nm - v.lane_progress_nm;
      if (travel < remain) {
        v.lane_progress_nm += travel;
        break;
      }
      travel -= remain;
      v.port = network_.lane(v.route.lanes[v.leg]).to;
      ++v.leg;
      if (v.leg == v.route.lanes.size()) {
        v.status = VesselStatus::anchored;
        v.arrival_time = t + (1.0 - travel / effective);
        v.lane_progress_nm = v.lane_length_nm = 0.0;
        v.detoured = false;
        break;
      }
      v.lane_progress_nm = 0.0;
      v.lane_length_nm = network_.lane(v.route.lanes[v.leg]).distance_nm;
      v.detoured = false;
    }
  }

  // Port queues.
  for (std::size_t p = 0; p < port_count(); ++p) {
    auto& port = state.ports[p];
    std::vector<VesselId> joiners;
    std::vector<VesselId> holds;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = state.vessels[i];
      if (v.port != static_cast<PortId>(p)) continue;
      if (v.status == VesselStatus::anchored && micro[i].berth_request) joiners.push_back(static_cast<VesselId>(i));
      if (v.status == VesselStatus::berthed && !micro[i].crane_request) holds.push_back(static_cast<VesselId>(i));
    }
    std::stable_sort(joiners.begin(), joiners.end(), [&](VesselId a, VesselId b) {
      return state.vessels[static_cast<std::size_t>(a)].arrival_time <
             state.vessels[static_cast<std::size_t>(b)].arrival_time;
    });
    for (VesselId id : joiners) state.vessels[static_cast<std::size_t>(id)].status = VesselStatus::queued;

    auto out = queue_step(port, joiners, holds);
    m.berth_overflow[p] = out.berth_overflow;
    m.crane_overflow[p] = out.crane_overflow;
    for (VesselId id : out.served) state.vessels[static_cast<std::size_t>(id)].status = VesselStatus::berthed;
    for (VesselId id : out.waiting) waiting[static_cast<std::size_t>(id)] = 1.0;
    for (VesselId id : out.crane_waiting) waiting[static_cast<std::size_t>(id)] = 1.0;
    for (VesselId id : out.completed) {
      auto& v = state.vessels[static_cast<std::size_t>(id)];
      v.status = VesselStatus::ready;
      v.fuel_level = v.spec.fuel_capacity;
      ++v.jobs_completed;
      ++state.throughput;
      ++m.voyages_completed;
      assign_job(state, v);
    }
    m.berth_occupancy[p] = static_cast<int>(port.berthed.size());
    m.crane_occupancy[p] = out.cranes_used;
    if (m.berth_occupancy[p] > port.spec.berth_capacity || out.cranes_used > port.spec.crane_capacity) {
      ++m.capacity_violations;
    }
  }
  state.capacity_violations += static_cast<std::uint64_t>(m.capacity_violations);

  // Costs and rewards.
  const auto& price = config_.prices;
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = state.vessels[i];
    if (v.status == VesselStatus::anchored) waiting[i] = 1.0;
    const bool en_route = v.status == VesselStatus::transit ||
                          (v.status == VesselStatus::ready && v.destination != v.port);
    const double late = en_route && t > v.directive.window_end ? 1.0 : 0.0;
    m.late_hours += static_cast<int>(late);
    const double cost = price.fuel * m.fuel[i] + price.time + price.wait * (waiting[i] + late);
    m.cost[i] = cost;
    m.raw_reward[i] = -cost;
    m.waiting_hours += waiting[i];
    state.cumulative_cost[i] += cost;
    state.waiting_hours[i] += waiting[i];
    v.window_emissions += m.vessel_emissions[i];
    m.emissions += m.vessel_emissions[i];
  }
  state.total_waiting_hours += m.waiting_hours;
  if (m.emissions > emission_bound_ * (1.0 + 1e-12)) {
    throw InvariantViolation("step emissions " + std::to_string(m.emissions) + " exceed bound " +
                             std::to_string(emission_bound_));
  }

  // Failures, then weather, for the next hour.
  const auto& fail = config_.failures;
  for (auto& v : state.vessels) {
    if (!v.healthy) {
      if (--v.failure_remaining <= 0) {
        v.healthy = true;
        v.failure_remaining = 0;
        v.max_speed = v.spec.v_max;
      }
    } else if (fail.duration_hours > 0 && state.rng.bernoulli(fail.probability)) {
      v.healthy = false;
      v.failure_remaining = fail.duration_hours;
      v.max_speed = v.spec.v_max * fail.speed_factor;
    }
  }
  state.weather = sample_weather(state.weather, config_.weather, state.rng);

  state.cumulative_emissions += m.emissions;
  ++state.t;
  result.rewards = m.raw_reward;
  return result;
}

Observation Environment::observe(const FleetState& state, VesselId agent, const MacroAction& macro) const {
  if (agent < 0 || static_cast<std::size_t>(agent) >= state.vessels.size()) {
    throw UnknownAgent("vessel " + std::to_string(agent));
  }
  const auto& v = state.vessels[static_cast<std::size_t>(agent)];
  Observation o;
  o.agent = agent;
  o.t = state.t;
  o.status = v.status;
  o.speed = v.speed;
  o.v_ref = v.spec.v_ref;
  o.v_max = v.spec.v_max;
  o.max_speed = v.max_speed;
  o.hull_coefficient = v.spec.hull_coefficient;
  o.position_fraction = v.position_fraction();
  o.remaining_distance_nm = remaining_distance(v);
  o.detoured = v.detoured;
  o.fuel_level = v.fuel_level;
  o.fuel_capacity = v.spec.fuel_capacity;
  o.healthy = v.healthy;
  o.failure_remaining = v.failure_remaining;
  o.local_port = local_port(v);
  const auto& port = state.ports[static_cast<std::size_t>(o.local_port)];
  o.berth_queue = static_cast<int>(port.berth_queue.size());
  o.berthed = static_cast<int>(port.berthed.size());
  o.crane_queue = static_cast<int>(port.crane_queue.size());
  o.berth_capacity = port.spec.berth_capacity;
  o.crane_capacity = port.spec.crane_capacity;
  o.weather = local_weather(state, v).scenario;
  // The directive the environment will apply this step.
  o.directive = v.directive;
  if (macro.epoch != state.applied_epoch && static_cast<std::size_t>(agent) < macro.directives.size()) {
    const auto& d = macro.directives[static_cast<std::size_t>(agent)];
    if (d.job == v.job) o.directive = d;
    o.directive.envelope = d.envelope;
    o.window_emissions = 0.0;
  } else {
    o.window_emissions = v.window_emissions;
  }
  o.cumulative_cost = state.cumulative_cost[static_cast<std::size_t>(agent)];
  return o;
}

}  // namespace ecofair
