#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "ecofair/env_config.hpp"
#include "ecofair/macro_action.hpp"
#include "ecofair/network.hpp"
#include "ecofair/rng.hpp"

namespace ecofair {

/// Scenario per weather region.
struct WeatherState {
  std::array<Scenario, kRegionCount> region{Scenario::calm, Scenario::calm};

  friend bool operator==(const WeatherState&, const WeatherState&) = default;
};

/// Weather as experienced at one location.
struct WeatherConditions {
  Scenario scenario = Scenario::calm;
  double speed_multiplier = 1.0;
  double fuel_multiplier = 1.0;
};

WeatherConditions conditions(const WeatherModel& model, Scenario s);

enum class VesselStatus : std::uint8_t {
  ready,     // docked, free to depart
  transit,   // on a lane
  anchored,  // arrived, not in the berth queue
  queued,    // waiting for a berth
  berthed,   // holding a berth until its call is serviced
};
inline constexpr std::size_t kStatusCount = 5;

const char* to_string(VesselStatus s);

struct Vessel {
  VesselSpec spec;
  double fuel_level = 0.0;
  bool healthy = true;
  int failure_remaining = 0;  // hours
  double max_speed = 0.0;     // v_max, reduced while failed

  VesselStatus status = VesselStatus::ready;
  PortId port = 0;            // docked port, or origin of the current lane
  PortId destination = 0;
  std::uint64_t job = 0;
  int job_started = 0;        // step the current job was assigned
  int jobs_completed = 0;

  Route route;                // active route while in transit
  std::size_t leg = 0;
  double lane_progress_nm = 0.0;
  double lane_length_nm = 0.0;  // includes detour extension
  bool detoured = false;
  double arrival_time = 0.0;    // step + fraction of the hour, for queue order

  double speed = 0.0;           // knots commanded last step
  VesselDirective directive;
  double window_emissions = 0.0;

  double position_fraction() const {
    return lane_length_nm > 0.0 ? lane_progress_nm / lane_length_nm : 0.0;
  }

  friend bool operator==(const Vessel&, const Vessel&) = default;
};

struct BerthSlot {
  VesselId vessel = 0;
  int remaining_hours = 0;

  friend bool operator==(const BerthSlot&, const BerthSlot&) = default;
};

struct Port {
  PortSpec spec;
  std::deque<VesselId> berth_queue;
  std::vector<BerthSlot> berthed;     // in berthing order
  std::vector<VesselId> crane_queue;  // berthed vessels denied a crane last resolution

  friend bool operator==(const Port&, const Port&) = default;
};

struct QueueOutcome {
  std::vector<VesselId> served;         // assigned a berth this step
  std::vector<VesselId> waiting;        // still in the berth queue
  std::vector<VesselId> crane_waiting;  // berthed but without a crane
  std::vector<VesselId> completed;      // call finished; berth released
  int berth_demand = 0;
  int crane_demand = 0;
  int berth_overflow = 0;  // [q - C]+ before resolution
  int crane_overflow = 0;
  int cranes_used = 0;
};

/// FIFO berth and crane resolution for one hour.
///
/// Arrivals join the back of the queue, berths are filled from the front,
/// then cranes go to berthed vessels in berthing order (skipping `crane_holds`).
/// A vessel holding a crane works one service hour; calls reaching zero release
/// their berth at the end of the hour.
QueueOutcome queue_step(Port& port, std::span<const VesselId> arrivals,
                        std::span<const VesselId> crane_holds = {});

/// k_i (v / v_ref)^3 times the fuel multiplier; idle_fraction * k_i when
/// stationary. Throws DomainError if speed is negative or above max_speed.
double fuel_rate(const Vessel& vessel, double speed, const WeatherConditions& weather,
                 double idle_fraction = 0.02);

/// One Markov transition per region. Throws MalformedMatrix on bad rows.
WeatherState sample_weather(const WeatherState& current, const WeatherModel& model, Rng& rng);

struct MicroAction {
  std::size_t speed_level = 0;  // index into EnvConfig::speed_grid
  bool berth_request = true;
  bool crane_request = true;
  bool detour = false;          // only meaningful mid-transit

  friend bool operator==(const MicroAction&, const MicroAction&) = default;
};

struct StepMetrics {
  double emissions = 0.0;                 // e_t, kg CO2e
  std::vector<double> vessel_emissions;   // kg CO2e
  std::vector<double> fuel;               // kg
  std::vector<int> berth_overflow;        // per port, pre-resolution
  std::vector<int> crane_overflow;
  std::vector<int> berth_occupancy;       // per port, post-resolution
  std::vector<int> crane_occupancy;
  std::vector<double> cost;               // l_i
  std::vector<double> raw_reward;         // r_t^i = -l_i
  int voyages_completed = 0;
  double waiting_hours = 0.0;
  int late_hours = 0;
  int capacity_violations = 0;            // post-resolution; always 0

  friend bool operator==(const StepMetrics&, const StepMetrics&) = default;
};

struct FleetState {
  int t = 0;
  std::vector<Vessel> vessels;
  std::vector<Port> ports;
  WeatherState weather;
  double cumulative_emissions = 0.0;   // E_t
  std::vector<double> cumulative_cost; // c_i
  std::vector<double> waiting_hours;   // per vessel
  int throughput = 0;
  double total_waiting_hours = 0.0;
  int applied_epoch = -1;
  std::uint64_t applied_macro_signature = 0;
  std::uint64_t capacity_violations = 0;
  Rng rng;

  friend bool operator==(const FleetState&, const FleetState&) = default;
};

/// Local slice of the state for one vessel.
struct Observation {
  VesselId agent = 0;
  int t = 0;
  // own kinematics
  VesselStatus status = VesselStatus::ready;
  double speed = 0.0;
  double v_ref = 0.0;
  double v_max = 0.0;
  double max_speed = 0.0;
  double hull_coefficient = 0.0;
  double position_fraction = 0.0;
  double remaining_distance_nm = 0.0;
  bool detoured = false;
  // own fuel and health
  double fuel_level = 0.0;
  double fuel_capacity = 0.0;
  bool healthy = true;
  int failure_remaining = 0;
  // local port (docked port, or next port while in transit)
  PortId local_port = 0;
  int berth_queue = 0;
  int berthed = 0;
  int crane_queue = 0;
  int berth_capacity = 1;
  int crane_capacity = 1;
  // local weather
  Scenario weather = Scenario::calm;
  // macro directive and own accounting
  VesselDirective directive;
  double window_emissions = 0.0;
  double cumulative_cost = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct StepResult {
  std::vector<double> rewards;
  StepMetrics metrics;
};

struct EnvOptions {
  std::size_t route_candidates = 3;
  int window_slack = 2;
};

/// Discrete-time (one step = one hour) maritime twin.
class Environment {
 public:
  explicit Environment(EnvConfig config, EnvOptions options = {});

  const EnvConfig& config() const { return config_; }
  const EnvOptions& options() const { return options_; }
  const PortNetwork& network() const { return network_; }
  const RouteTable& routes() const { return routes_; }
  std::size_t vessel_count() const { return config_.vessels.size(); }
  std::size_t port_count() const { return network_.port_count(); }

  /// Per-step bound e_bar on fleet emissions.
  double emission_bound() const { return emission_bound_; }

  FleetState reset(std::uint64_t seed) const;

  /// Advances `state` by one hour. Throws DimensionMismatch unless there is
  /// one MicroAction and one directive per vessel.
  StepResult step(FleetState& state, std::span<const MicroAction> micro, const MacroAction& macro) const;

  Observation observe(const FleetState& state, VesselId agent, const MacroAction& macro) const;

  WeatherConditions local_weather(const FleetState& state, const Vessel& vessel) const;
  LaneClass region_of(const Vessel& vessel) const;
  double remaining_distance(const Vessel& vessel) const;
  PortId local_port(const Vessel& vessel) const;

  /// Nominal hours to cover `distance_nm` at v_ref, rounded up.
  static int nominal_eta(const Vessel& vessel, double distance_nm);

 private:
  void assign_job(FleetState& state, Vessel& vessel) const;
  void apply_macro(FleetState& state, const MacroAction& macro) const;
  void depart(Vessel& vessel) const;

  EnvConfig config_;
  EnvOptions options_;
  PortNetwork network_;
  RouteTable routes_;
  std::vector<std::vector<PortId>> job_targets_;  // per origin port
  double emission_bound_ = 0.0;
};

}  // namespace ecofair
