#pragma once

#include <vector>

#include "ecofair/env_config.hpp"
#include "ecofair/environment.hpp"
#include "ecofair/run_config.hpp"

namespace ecofair::test {

// Two ports, one lane each way, calm weather, no failures.
inline EnvConfig two_port_config(int vessels = 2, int berth_capacity = 1) {
  EnvConfig c;
  c.ports = {{0, berth_capacity, 1, 2}, {1, berth_capacity, 1, 2}};
  c.lanes = {{0, 1, 28.0, 2.0, LaneClass::coastal}, {1, 0, 28.0, 2.0, LaneClass::coastal}};
  for (int i = 0; i < vessels; ++i) {
    VesselSpec v;
    v.id = i;
    v.hull_coefficient = 500.0 * (i + 1);
    v.start = 0;
    c.vessels.push_back(v);
  }
  c.failures.probability = 0.0;
  c.weather.initial = {1.0, 0.0, 0.0};
  c.weather.transition = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  return c;
}

// Four ports on a ring with a chord, mixed fleet, default weather and failures.
inline EnvConfig ring_config(int vessels = 6) {
  EnvConfig c;
  c.ports = {{0, 1, 1, 3}, {1, 2, 1, 2}, {2, 1, 1, 3}, {3, 2, 2, 2}};
  auto lane = [&](int a, int b, double nm, LaneClass r) {
    c.lanes.push_back({a, b, nm, nm / 14.0, r});
    c.lanes.push_back({b, a, nm, nm / 14.0, r});
  };
  lane(0, 1, 120, LaneClass::coastal);
  lane(1, 2, 180, LaneClass::open_sea);
  lane(2, 3, 140, LaneClass::coastal);
  lane(3, 0, 200, LaneClass::open_sea);
  lane(0, 2, 260, LaneClass::open_sea);
  for (int i = 0; i < vessels; ++i) {
    VesselSpec v;
    v.id = i;
    v.hull_coefficient = 400.0 * (1 << (i % 5));
    v.start = i % 4;
    c.vessels.push_back(v);
  }
  return c;
}

inline RunConfig small_run(int episodes = 3, int horizon = 30) {
  RunConfig rc;
  rc.environment = ring_config();
  rc.episodes = episodes;
  rc.horizon = horizon;
  rc.seeds = {11};
  rc.hierarchy.tau_h = 10;
  rc.constraints.budget_kg = 2e5;
  rc.output.clear();
  return rc;
}

inline std::vector<MicroAction> all_idle(std::size_t n) {
  MicroAction a;
  a.speed_level = 0;
  a.berth_request = false;
  a.crane_request = false;
  return std::vector<MicroAction>(n, a);
}

// Directives as the environment assigned them, for stepping without a policy.
inline MacroAction current_macro(const FleetState& s, int epoch) {
  MacroAction m;
  m.epoch = epoch;
  m.issued_at = s.t;
  for (const auto& v : s.vessels) m.directives.push_back(v.directive);
  return m;
}

}  // namespace ecofair::test
