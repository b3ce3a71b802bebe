#pragma once

#include <cstdint>
#include <vector>

#include "ecofair/network.hpp"

namespace ecofair {

/// Per-vessel part of a macro-action.
struct VesselDirective {
  std::uint64_t job = 0;       // job sequence number the route/window refer to
  int route_id = 0;            // index into the vessel's candidate set
  std::vector<PortId> route;   // port path, origin first
  int window_offset = 0;       // steps added to the nominal ETA
  int window_start = 0;        // inclusive step bounds of the arrival window
  int window_end = 0;
  double envelope = 0.0;       // kg CO2e allotted for the macro window

  friend bool operator==(const VesselDirective&, const VesselDirective&) = default;
};

/// High-level decision u_k, held fixed for one macro epoch.
struct MacroAction {
  int epoch = 0;
  int issued_at = 0;
  std::vector<VesselDirective> directives;  // one per vessel, indexed by id

  friend bool operator==(const MacroAction&, const MacroAction&) = default;
};

}  // namespace ecofair
