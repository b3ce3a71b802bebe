#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ecofair/environment.hpp"
#include "ecofair/learner.hpp"
#include "ecofair/macro_action.hpp"
#include "ecofair/rng.hpp"

namespace ecofair {

/// floor(t / tau_h).
int macro_index(int t, int tau_h);

struct MacroClock {
  int tau_h = 10;
  int horizon = 50;

  MacroClock() = default;
  /// Throws InvalidConfig unless 1 <= tau_h <= horizon.
  MacroClock(int tau_h, int horizon);

  int epoch(int t) const { return macro_index(t, tau_h); }
  int epochs() const { return (horizon + tau_h - 1) / tau_h; }
  bool boundary(int t) const { return t % tau_h == 0; }
  /// Steps covered by epoch k (the last one may be short).
  int epoch_length(int k) const;
};

/// Fleet-level aggregates the high-level policy sees.
struct HighLevelContext {
  int t = 0;
  int horizon = 50;
  double mean_queue_ratio = 0.0;  // mean over ports of berth queue / capacity
  double max_queue_ratio = 0.0;
  double emissions = 0.0;         // E_t, kg
  double budget = 0.0;            // B, kg; 0 when no cap applies
  double window_budget = 0.0;     // share of the remaining budget for this window, kg
  double storm_fraction = 0.0;    // regions in storm
  double swell_fraction = 0.0;
  double phi = 0.0;               // current inequality score
  double mean_cost = 0.0;         // mean c_i
};

/// Budget for the window starting at t: the unspent budget spread evenly
/// over the remaining steps, times the window length.
HighLevelContext summarize(const Environment& env, const FleetState& state, const MacroClock& clock,
                           double budget_kg, double phi);

/// What the high-level policy may choose for one vessel.
struct VesselLeg {
  VesselId vessel = 0;
  std::uint64_t job = 0;
  VesselStatus status = VesselStatus::ready;
  bool has_destination = false;
  std::vector<Route> candidates;   // ready: k shortest; transit: the active route only
  int active_route_id = 0;
  int job_started = 0;             // windows are anchored here
  VesselDirective active;          // directive in force; kept while in transit
  double remaining_distance_nm = 0.0;
  double v_ref = 1.0;
  double hull_coefficient = 0.0;
  double cost = 0.0;               // c_i so far
};

/// Throws EmptyRouteSet if a vessel with a destination has no candidate route.
std::vector<VesselLeg> vessel_legs(const Environment& env, const FleetState& state);

struct MacroSettings {
  std::size_t route_candidates = 3;
  std::vector<int> window_offsets{-2, 0, 2, 4};
  int window_slack = 2;
  double hull_reference = 2000.0;

  std::size_t action_count() const { return route_candidates * window_offsets.size(); }
};

/// Macro feature layout, in order:
///   0 bias
///   1 mean berth queue / capacity
///   2 max berth queue / capacity
///   3 emissions used E_t / B, clipped to [0, 2] (0 without a cap)
///   4 episode progress t / T
///   5 storm fraction, 6 swell fraction
///   7 phi
///   8 relative cost c_i / mean c - 1, clipped to [-1, 3]
///   9 hull coefficient / hull_reference
///  10 ready flag, 11 transit flag
///  12-14 candidate route length / shortest - 1 (0 when absent)
///  15 remaining distance / (v_ref tau_H), clipped to [0, 2]
inline constexpr std::size_t kMacroFeatureCount = 16;

std::vector<double> macro_features(const HighLevelContext& ctx, const VesselLeg& leg, const MacroClock& clock,
                                   const MacroSettings& settings);

/// Route-major action index: route * offsets + offset. Only ready vessels
/// with a destination have a choice; everyone else gets the zero offset.
std::vector<std::uint8_t> macro_action_mask(const VesselLeg& leg, const MacroSettings& settings);

struct MacroSample {
  std::vector<double> features;
  std::vector<std::uint8_t> mask;
  std::size_t action = 0;
  double log_prob = 0.0;
  bool forced = false;  // only one admissible action
};

struct MacroDecision {
  MacroAction action;
  std::vector<MacroSample> samples;  // per vessel
};

/// Samples route and window offset per vessel, then splits the window budget
/// in proportion to each vessel's forecast distance over the window. Windows
/// are anchored at the step the job was assigned; vessels already under way
/// keep their route and window.
MacroDecision macro_decide(const LinearSoftmaxPolicy& policy, const HighLevelContext& ctx,
                           std::span<const VesselLeg> legs, const MacroClock& clock, const MacroSettings& settings,
                           Rng& rng);

/// Fixed directive for flat execution: shortest route, zero offset, equal envelopes.
MacroAction default_macro(std::span<const VesselLeg> legs, const HighLevelContext& ctx, const MacroClock& clock,
                          const MacroSettings& settings);

/// envelope_i = budget * d_i / sum d, last entry absorbing rounding; equal
/// split when every distance is zero. Throws DomainError on a negative budget
/// or distance.
std::vector<double> allocate_budget(double budget, std::span<const double> distances);

struct MicroDecision {
  MicroAction action;
  std::size_t index = 0;
  double log_prob = 0.0;
  std::vector<double> features;
  std::vector<std::uint8_t> mask;
};

/// Samples one vessel's micro action from its own observation (which carries
/// the active directive) and the shared low-level policy.
MicroDecision micro_decide(const LinearSoftmaxPolicy& policy, const Observation& obs, const FeatureScales& scales,
                           Rng& rng);

struct CapAdaptation {
  bool enabled = false;
  double delta = 0.02;
};

/// B (1 - delta) after a fair, feasible episode; B (1 + delta) after an
/// infeasible one; otherwise B.
double adapt_cap(double budget, double episode_gini, double zeta, bool feasible, const CapAdaptation& mode);

}  // namespace ecofair
