#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ecofair/network.hpp"

namespace ecofair {

enum class Scenario : std::uint8_t { calm = 0, swell = 1, storm = 2 };
inline constexpr std::size_t kScenarioCount = 3;

const char* to_string(Scenario s);
const char* to_string(LaneClass c);

/// Finite-state weather chain shared by all regions.
struct WeatherModel {
  std::array<std::array<double, kScenarioCount>, kScenarioCount> transition{{
      {0.90, 0.08, 0.02},
      {0.30, 0.60, 0.10},
      {0.20, 0.30, 0.50},
  }};
  std::array<double, kScenarioCount> initial{0.70, 0.20, 0.10};
  std::array<double, kScenarioCount> speed_multiplier{1.0, 0.85, 0.6};
  std::array<double, kScenarioCount> fuel_multiplier{1.0, 1.15, 1.5};

  /// Throws MalformedMatrix for negative entries or rows not summing to 1
  /// within 1e-9; throws InvalidConfig for multipliers out of range.
  void validate() const;
  double worst_fuel_multiplier() const;

  friend bool operator==(const WeatherModel&, const WeatherModel&) = default;
};

struct VesselSpec {
  VesselId id = 0;
  double hull_coefficient = 1000.0;  // kg fuel per hour at v_ref
  double v_ref = 14.0;               // knots
  double v_max = 20.0;               // knots
  double fuel_capacity = 200000.0;   // kg
  PortId start = 0;

  friend bool operator==(const VesselSpec&, const VesselSpec&) = default;
};

struct FailureModel {
  double probability = 0.01;  // per vessel-hour
  double speed_factor = 0.5;  // multiplies v_max while failed
  int duration_hours = 6;

  friend bool operator==(const FailureModel&, const FailureModel&) = default;
};

/// Cost coefficients of the raw reward, in cost units.
struct PriceModel {
  double fuel = 0.001;  // per kg fuel
  double time = 0.5;    // per vessel-hour
  double wait = 2.0;    // per waiting or late vessel-hour

  friend bool operator==(const PriceModel&, const PriceModel&) = default;
};

inline constexpr std::size_t kSpeedLevels = 5;

struct EnvConfig {
  std::vector<PortSpec> ports;
  std::vector<Lane> lanes;
  std::vector<VesselSpec> vessels;
  WeatherModel weather;
  FailureModel failures;
  PriceModel prices;
  double carbon_factor = 3.114;   // kg CO2e per kg fuel
  double idle_fraction = 0.02;    // stationary burn as a fraction of k_i
  double detour_distance_factor = 1.15;
  std::array<double, kSpeedLevels> speed_grid{0.0, 0.4, 0.6, 0.8, 1.0};  // x v_max
  int job_max_hops = 2;
  std::optional<double> emission_bound;  // kg CO2e per step; derived when unset

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

/// Parses the environment JSON document. Unknown keys are rejected.
EnvConfig env_config_from_json(const nlohmann::json& doc);
nlohmann::json env_config_to_json(const EnvConfig& config);
EnvConfig load_env_config(const std::filesystem::path& path);

/// Structural validation shared by the loader and Environment.
void validate(const EnvConfig& config);

struct SyntheticNetworkSpec {
  int ports = 16;
  int vessels = 50;
  std::uint64_t seed = 2024;
  double min_distance_nm = 100.0;
  double max_distance_nm = 2000.0;
  double area_nm = 1200.0;  // side of the square ports are scattered in
  int neighbours = 2;

  friend bool operator==(const SyntheticNetworkSpec&, const SyntheticNetworkSpec&) = default;
};

/// Seeded random-geometric port network plus a heterogeneous fleet.
EnvConfig synthetic_env_config(const SyntheticNetworkSpec& spec);

/// Heterogeneous fleet of `count` vessels over `ports` ports.
std::vector<VesselSpec> synthetic_fleet(int count, int ports, std::uint64_t seed);

}  // namespace ecofair
