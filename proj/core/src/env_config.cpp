#include "ecofair/env_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "ecofair/error.hpp"
#include "ecofair/rng.hpp"
#include "json_util.hpp"

namespace ecofair {

using nlohmann::json;

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::calm: return "calm";
    case Scenario::swell: return "swell";
    case Scenario::storm: return "storm";
  }
  return "?";
}

const char* to_string(LaneClass c) {
  return c == LaneClass::coastal ? "coastal" : "open_sea";
}

namespace {

constexpr double kDefaultReferenceSpeed = 14.0;

LaneClass lane_class_from(const std::string& s) {
  if (s == "coastal") return LaneClass::coastal;
  if (s == "open_sea") return LaneClass::open_sea;
  throw InvalidConfig("unknown lane class '" + s + "'");
}

Scenario scenario_from(const std::string& s) {
  if (s == "calm") return Scenario::calm;
  if (s == "swell") return Scenario::swell;
  if (s == "storm") return Scenario::storm;
  throw InvalidConfig("unknown weather scenario '" + s + "'");
}

template <std::size_t N>
std::array<double, N> fixed_array(const json& j, const char* ctx) {
  if (!j.is_array() || j.size() != N) {
    throw InvalidConfig(std::string(ctx) + " must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<double>();
  return out;
}

}  // namespace

void WeatherModel::validate() const {
  auto check_row = [](const std::array<double, kScenarioCount>& row, const std::string& what) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw MalformedMatrix(what + " has a negative or non-finite entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw MalformedMatrix(what + " sums to " + std::to_string(sum) + ", expected 1");
    }
  };
  for (std::size_t i = 0; i < kScenarioCount; ++i) {
    check_row(transition[i], "transition row " + std::to_string(i));
  }
  check_row(initial, "initial distribution");
  for (std::size_t i = 0; i < kScenarioCount; ++i) {
    if (!(speed_multiplier[i] > 0.0 && speed_multiplier[i] <= 1.0)) {
      throw InvalidConfig("speed multipliers must lie in (0, 1]");
    }
    if (!(fuel_multiplier[i] >= 1.0 && fuel_multiplier[i] <= 10.0)) {
      throw InvalidConfig("fuel multipliers must lie in [1, 10]");
    }
  }
}

double WeatherModel::worst_fuel_multiplier() const {
  return *std::max_element(fuel_multiplier.begin(), fuel_multiplier.end());
}

void validate(const EnvConfig& config) {
  // Network invariants are enforced by the PortNetwork constructor.
  PortNetwork network(config.ports, config.lanes);
  config.weather.validate();
  if (config.vessels.empty()) throw InvalidConfig("fleet must contain at least one vessel");
  for (std::size_t i = 0; i < config.vessels.size(); ++i) {
    const auto& v = config.vessels[i];
    const auto tag = "vessel " + std::to_string(i);
    if (v.id != static_cast<VesselId>(i)) throw InvalidConfig("vessel ids must be 0..N-1 in order");
    if (!(v.hull_coefficient > 0.0)) throw InvalidConfig(tag + " hull_coefficient must be > 0");
    if (!(v.v_ref > 0.0 && v.v_ref <= v.v_max)) throw InvalidConfig(tag + " requires 0 < v_ref <= v_max");
    if (!(v.fuel_capacity > 0.0)) throw InvalidConfig(tag + " fuel_capacity must be > 0");
    if (v.start < 0 || static_cast<std::size_t>(v.start) >= config.ports.size()) {
      throw InvalidConfig(tag + " starts at an unknown port");
    }
  }
  const auto& f = config.failures;
  if (!(f.probability >= 0.0 && f.probability <= 1.0)) throw InvalidConfig("failure probability outside [0,1]");
  if (!(f.speed_factor > 0.0 && f.speed_factor <= 1.0)) throw InvalidConfig("failure speed_factor outside (0,1]");
  if (f.duration_hours < 0) throw InvalidConfig("failure duration must be >= 0");
  const auto& p = config.prices;
  if (p.fuel < 0.0 || p.time < 0.0 || p.wait < 0.0) throw InvalidConfig("prices must be >= 0");
  if (!(config.carbon_factor > 0.0)) throw InvalidConfig("carbon_factor must be > 0");
  if (!(config.idle_fraction >= 0.0 && config.idle_fraction <= 1.0)) throw InvalidConfig("idle_fraction outside [0,1]");
  if (!(config.detour_distance_factor >= 1.0)) throw InvalidConfig("detour distance factor must be >= 1");
  for (std::size_t i = 0; i < kSpeedLevels; ++i) {
    const double s = config.speed_grid[i];
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidConfig("speed grid entries must lie in [0,1]");
    if (i > 0 && !(s > config.speed_grid[i - 1])) throw InvalidConfig("speed grid must be strictly increasing");
  }
  if (config.speed_grid[0] != 0.0) throw InvalidConfig("speed grid must start at 0");
  if (config.job_max_hops < 1) throw InvalidConfig("job_max_hops must be >= 1");
  if (config.emission_bound && !(*config.emission_bound > 0.0)) throw InvalidConfig("emission_bound must be > 0");
}

EnvConfig env_config_from_json(const json& doc) {
  using detail::get_or;
  using detail::get_required;
  using detail::reject_unknown_keys;

  reject_unknown_keys(doc,
                      {"ports", "lanes", "vessels", "weather", "failures", "prices", "carbon_factor",
                       "idle_fraction", "detour_distance_factor", "speed_grid", "job_max_hops",
                       "emission_bound", "reference_speed"},
                      "environment");
  EnvConfig cfg;
  const double reference_speed = get_or(doc, "reference_speed", kDefaultReferenceSpeed);
  if (!(reference_speed > 0.0)) throw InvalidConfig("reference_speed must be > 0");

  try {
    for (const auto& p : get_required<json>(doc, "ports", "environment")) {
      reject_unknown_keys(p, {"id", "berth_capacity", "crane_capacity", "service_hours"}, "port");
      cfg.ports.push_back(PortSpec{
          .id = get_required<int>(p, "id", "port"),
          .berth_capacity = get_required<int>(p, "berth_capacity", "port"),
          .crane_capacity = get_required<int>(p, "crane_capacity", "port"),
          .service_hours_per_call = get_or(p, "service_hours", 1),
      });
    }
    for (const auto& l : get_required<json>(doc, "lanes", "environment")) {
      reject_unknown_keys(l, {"from", "to", "nm", "hours", "class", "bidirectional"}, "lane");
      Lane lane{
          .from = get_required<int>(l, "from", "lane"),
          .to = get_required<int>(l, "to", "lane"),
          .distance_nm = get_required<double>(l, "nm", "lane"),
          .base_hours = 0.0,
          .region = lane_class_from(get_or<std::string>(l, "class", "coastal")),
      };
      lane.base_hours = get_or(l, "hours", lane.distance_nm / reference_speed);
      cfg.lanes.push_back(lane);
      if (get_or(l, "bidirectional", false)) {
        std::swap(lane.from, lane.to);
        cfg.lanes.push_back(lane);
      }
    }
    for (const auto& v : get_required<json>(doc, "vessels", "environment")) {
      reject_unknown_keys(v, {"id", "hull_coefficient", "v_ref", "v_max", "fuel_capacity", "start"}, "vessel");
      VesselSpec spec{
          .id = get_required<int>(v, "id", "vessel"),
          .hull_coefficient = get_required<double>(v, "hull_coefficient", "vessel"),
          .v_ref = get_required<double>(v, "v_ref", "vessel"),
          .v_max = get_required<double>(v, "v_max", "vessel"),
          .fuel_capacity = 0.0,
          .start = get_required<int>(v, "start", "vessel"),
      };
      spec.fuel_capacity = get_or(v, "fuel_capacity", 200.0 * spec.hull_coefficient);
      cfg.vessels.push_back(spec);
    }
    if (auto it = doc.find("weather"); it != doc.end()) {
      const auto& w = *it;
      reject_unknown_keys(w, {"transition", "initial", "speed_multiplier", "fuel_multiplier"}, "weather");
      if (auto t = w.find("transition"); t != w.end()) {
        if (!t->is_array() || t->size() != kScenarioCount) throw MalformedMatrix("transition must be 3x3");
        for (std::size_t i = 0; i < kScenarioCount; ++i) {
          cfg.weather.transition[i] = fixed_array<kScenarioCount>((*t)[i], "transition row");
        }
      }
      if (auto t = w.find("initial"); t != w.end()) {
        if (t->is_string()) {
          cfg.weather.initial = {0.0, 0.0, 0.0};
          cfg.weather.initial[static_cast<std::size_t>(scenario_from(t->get<std::string>()))] = 1.0;
        } else {
          cfg.weather.initial = fixed_array<kScenarioCount>(*t, "weather.initial");
        }
      }
      if (auto t = w.find("speed_multiplier"); t != w.end()) {
        cfg.weather.speed_multiplier = fixed_array<kScenarioCount>(*t, "weather.speed_multiplier");
      }
      if (auto t = w.find("fuel_multiplier"); t != w.end()) {
        cfg.weather.fuel_multiplier = fixed_array<kScenarioCount>(*t, "weather.fuel_multiplier");
      }
    }
    if (auto it = doc.find("failures"); it != doc.end()) {
      reject_unknown_keys(*it, {"probability", "speed_factor", "duration_hours"}, "failures");
      cfg.failures.probability = get_or(*it, "probability", cfg.failures.probability);
      cfg.failures.speed_factor = get_or(*it, "speed_factor", cfg.failures.speed_factor);
      cfg.failures.duration_hours = get_or(*it, "duration_hours", cfg.failures.duration_hours);
    }
    if (auto it = doc.find("prices"); it != doc.end()) {
      reject_unknown_keys(*it, {"fuel", "time", "wait"}, "prices");
      cfg.prices.fuel = get_or(*it, "fuel", cfg.prices.fuel);
      cfg.prices.time = get_or(*it, "time", cfg.prices.time);
      cfg.prices.wait = get_or(*it, "wait", cfg.prices.wait);
    }
    cfg.carbon_factor = get_or(doc, "carbon_factor", cfg.carbon_factor);
    cfg.idle_fraction = get_or(doc, "idle_fraction", cfg.idle_fraction);
    cfg.detour_distance_factor = get_or(doc, "detour_distance_factor", cfg.detour_distance_factor);
    if (auto it = doc.find("speed_grid"); it != doc.end()) {
      cfg.speed_grid = fixed_array<kSpeedLevels>(*it, "speed_grid");
    }
    cfg.job_max_hops = get_or(doc, "job_max_hops", cfg.job_max_hops);
    if (auto it = doc.find("emission_bound"); it != doc.end() && !it->is_null()) {
      cfg.emission_bound = it->get<double>();
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(e.what());
  }
  validate(cfg);
  return cfg;
}

json env_config_to_json(const EnvConfig& cfg) {
  json doc;
  doc["ports"] = json::array();
  for (const auto& p : cfg.ports) {
    doc["ports"].push_back({{"id", p.id},
                            {"berth_capacity", p.berth_capacity},
                            {"crane_capacity", p.crane_capacity},
                            {"service_hours", p.service_hours_per_call}});
  }
  doc["lanes"] = json::array();
  for (const auto& l : cfg.lanes) {
    doc["lanes"].push_back({{"from", l.from},
                            {"to", l.to},
                            {"nm", l.distance_nm},
                            {"hours", l.base_hours},
                            {"class", to_string(l.region)}});
  }
  doc["vessels"] = json::array();
  for (const auto& v : cfg.vessels) {
    doc["vessels"].push_back({{"id", v.id},
                              {"hull_coefficient", v.hull_coefficient},
                              {"v_ref", v.v_ref},
                              {"v_max", v.v_max},
                              {"fuel_capacity", v.fuel_capacity},
                              {"start", v.start}});
  }
  json transition = json::array();
  for (const auto& row : cfg.weather.transition) transition.push_back(row);
  doc["weather"] = {{"transition", transition},
                    {"initial", cfg.weather.initial},
                    {"speed_multiplier", cfg.weather.speed_multiplier},
                    {"fuel_multiplier", cfg.weather.fuel_multiplier}};
  doc["failures"] = {{"probability", cfg.failures.probability},
                     {"speed_factor", cfg.failures.speed_factor},
                     {"duration_hours", cfg.failures.duration_hours}};
  doc["prices"] = {{"fuel", cfg.prices.fuel}, {"time", cfg.prices.time}, {"wait", cfg.prices.wait}};
  doc["carbon_factor"] = cfg.carbon_factor;
  doc["idle_fraction"] = cfg.idle_fraction;
  doc["detour_distance_factor"] = cfg.detour_distance_factor;
  doc["speed_grid"] = cfg.speed_grid;
  doc["job_max_hops"] = cfg.job_max_hops;
  if (cfg.emission_bound) doc["emission_bound"] = *cfg.emission_bound;
  return doc;
}

EnvConfig load_env_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
  return env_config_from_json(doc);
}

std::vector<VesselSpec> synthetic_fleet(int count, int ports, std::uint64_t seed) {
  if (count < 1 || ports < 1) throw InvalidConfig("synthetic fleet needs >= 1 vessel and port");
  Rng rng(splitmix64(seed ^ 0xF1EE7ULL));
  std::vector<VesselSpec> fleet;
  fleet.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    VesselSpec v;
    v.id = i;
    // Log-uniform hull coefficients: a few large ships and many small ones.
    v.hull_coefficient = 600.0 * std::exp(rng.uniform() * std::log(4000.0 / 600.0));
    v.v_max = rng.uniform(16.0, 24.0);
    v.v_ref = 0.7 * v.v_max;
    v.fuel_capacity = 200.0 * v.hull_coefficient;
    v.start = static_cast<PortId>(rng.index(static_cast<std::size_t>(ports)));
    fleet.push_back(v);
  }
  return fleet;
}

EnvConfig synthetic_env_config(const SyntheticNetworkSpec& spec) {
  if (spec.ports < 2) throw InvalidConfig("synthetic network needs >= 2 ports");
  if (!(spec.min_distance_nm > 0.0 && spec.max_distance_nm >= spec.min_distance_nm)) {
    throw InvalidConfig("synthetic distance range invalid");
  }
  Rng rng(spec.seed);
  const auto n = static_cast<std::size_t>(spec.ports);
  std::vector<std::array<double, 2>> xy(n);
  for (auto& p : xy) p = {rng.uniform(0.0, spec.area_nm), rng.uniform(0.0, spec.area_nm)};

  auto dist = [&](std::size_t a, std::size_t b) {
    const double d = std::hypot(xy[a][0] - xy[b][0], xy[a][1] - xy[b][1]);
    return std::clamp(d, spec.min_distance_nm, spec.max_distance_nm);
  };

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(spec.neighbours, 2)), n - 1);
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      const double dx = x == a ? -1.0 : dist(a, x);
      const double dy = y == a ? -1.0 : dist(a, y);
      return dx != dy ? dx < dy : x < y;
    });
    for (std::size_t j = 1; j <= k; ++j) adj[a][order[j]] = adj[order[j]][a] = true;
  }
  // Join components with their shortest bridging edge until connected.
  for (;;) {
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<std::size_t> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v) {
          if (adj[u][v] && comp[v] < 0) {
            comp[v] = ncomp;
            stack.push_back(v);
          }
        }
      }
      ++ncomp;
    }
    if (ncomp == 1) break;
    double best = 0.0;
    std::size_t ba = 0, bb = 0;
    bool found = false;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (comp[a] == 0 && comp[b] != 0 && (!found || dist(a, b) < best)) {
          best = dist(a, b);
          ba = a;
          bb = b;
          found = true;
        }
      }
    }
    adj[ba][bb] = adj[bb][ba] = true;
  }

  EnvConfig cfg;
  for (std::size_t p = 0; p < n; ++p) {
    cfg.ports.push_back(PortSpec{
        .id = static_cast<PortId>(p),
        .berth_capacity = 1 + static_cast<int>(rng.index(3)),
        .crane_capacity = 1 + static_cast<int>(rng.index(3)),
        .service_hours_per_call = 2 + static_cast<int>(rng.index(3)),
    });
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!adj[a][b]) continue;
      const double d = dist(a, b);
      cfg.lanes.push_back(Lane{
          .from = static_cast<PortId>(a),
          .to = static_cast<PortId>(b),
          .distance_nm = d,
          .base_hours = d / kDefaultReferenceSpeed,
          .region = d < 400.0 ? LaneClass::coastal : LaneClass::open_sea,
      });
    }
  }
  cfg.vessels = synthetic_fleet(spec.vessels, spec.ports, spec.seed);
  validate(cfg);
  return cfg;
}

}  // namespace ecofair
