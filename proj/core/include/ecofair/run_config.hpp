#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ecofair/constraints.hpp"
#include "ecofair/env_config.hpp"
#include "ecofair/fairness.hpp"
#include "ecofair/hierarchy.hpp"
#include "ecofair/learner.hpp"

namespace ecofair {

struct ConstraintSettings {
  std::optional<double> budget_kg;  // unset: calibrated from a no-constraints probe
  double cap_fraction = 0.85;
  int calibration_episodes = 50;
  // trained: average the last calibration_episodes of a full-length
  // no-constraints run. probe: average its first calibration_episodes.
  bool calibrate_trained = true;
  std::optional<int> window;        // T_w; unset means T
  double eta_base = 0.05;
  double dual_cap = 1e3;
  // Ledger unit in kg; unset means the per-step allowance B / T, so the
  // allowance is 1 and lambda e_t stays on the scale of one step's reward.
  std::optional<double> emission_unit_kg;
  DualPersistence persistence = DualPersistence::persist;
};

struct HierarchySettings {
  int tau_h = 10;
  MacroSettings macro;
  CapAdaptation cap_adaptation;
};

struct LearnerSettings {
  double learning_rate = 5e-4;
  double high_level_learning_rate = 5e-4;
  double discount = 0.99;
  double entropy_coef = 0.01;
  double temperature = 1.0;
  double baseline_decay = 0.05;
  bool normalize_advantages = true;
  // Sum the per-agent gradients (false) or average them over the fleet (true).
  bool average_over_agents = false;
  FeatureScales scales;
};

struct RunConfig {
  EnvConfig environment;
  int episodes = 1200;
  int horizon = 50;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  BaselineMode mode = BaselineMode::full;
  ConstraintSettings constraints;
  FairnessParams fairness;
  bool fairness_slope_set = false;  // otherwise beta_max is reached at 60% of training
  HierarchySettings hierarchy;
  LearnerSettings learner;
  std::filesystem::path output = "out";
};

/// `base_dir` resolves a relative "environment" path.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws InvalidConfig unless T >= tau_H >= 1, episodes >= 1 and seeds are nonempty.
void validate(const RunConfig& config);

/// Linear beta slope actually used by a run.
double effective_beta_slope(const RunConfig& config);

}  // namespace ecofair
