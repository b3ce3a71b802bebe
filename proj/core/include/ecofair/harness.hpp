#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecofair/constraints.hpp"
#include "ecofair/environment.hpp"
#include "ecofair/fairness.hpp"
#include "ecofair/hierarchy.hpp"
#include "ecofair/learner.hpp"
#include "ecofair/run_config.hpp"

namespace ecofair {

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  double total_return = 0.0;     // sum of raw rewards over agents and steps
  double emissions_total = 0.0;  // E_T, kg CO2e
  double cap = 0.0;              // B, kg CO2e
  double violation_excess = 0.0; // (E_T - B)+
  double gini = 0.0;
  double minmax = 0.0;
  int throughput = 0;
  double waiting_hours = 0.0;
  double lambda_final = 0.0;
  double beta_final = 0.0;
  double max_mu = 0.0;
  double max_nu = 0.0;
  // extra columns
  double cumulative_violation = 0.0;  // sum_t (e_t - B/T_w)+ in ledger units
  double priced_return = 0.0;         // after dual prices
  double shaped_return = 0.0;         // after dual prices and the fairness term

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

/// CSV column names, in EpisodeRecord field order.
const std::vector<std::string>& episode_columns();
std::vector<double> episode_values(const EpisodeRecord& r);
void write_episode_header(std::ostream& out);
void write_episode_row(std::ostream& out, const EpisodeRecord& r);
std::vector<EpisodeRecord> read_episode_csv(const std::filesystem::path& path);

/// Steps of Algorithm 1, reported to a trace hook in execution order.
enum class Phase { macro, micro, env_step, dual_update, beta_update, shaping, storage, learner_update };
const char* to_string(Phase p);
using PhaseHook = std::function<void(Phase, int t)>;

struct MacroLogEntry {
  int episode = 0;
  int epoch = 0;
  int t = 0;
  VesselId vessel = 0;
  int route_id = 0;
  int window_start = 0;
  int window_end = 0;
  double envelope = 0.0;
};

/// One seed's training run: environment, ledger, fairness schedule and the
/// shared low- and high-level policies. Episodes run strictly in order.
class ExperimentRun {
 public:
  /// `budget_kg` is the episode cap B.
  ExperimentRun(const RunConfig& config, std::uint64_t seed, double budget_kg);

  EpisodeRecord run_episode(int episode);
  std::vector<EpisodeRecord> run(int episodes);

  void set_phase_hook(PhaseHook hook) { hook_ = std::move(hook); }
  void set_macro_log(std::vector<MacroLogEntry>* log) { macro_log_ = log; }
  /// Observes each completed step: fleet state after the step and its metrics.
  void set_step_observer(std::function<void(const FleetState&, const StepMetrics&)> f) { observer_ = std::move(f); }

  const Environment& environment() const { return *env_; }
  const ConstraintLedger& ledger() const { return ledger_; }
  const FairnessState& fairness() const { return fairness_; }
  const LinearSoftmaxPolicy& low_policy() const { return low_; }
  const LinearSoftmaxPolicy& high_policy() const { return high_; }
  const AblationFlags& flags() const { return flags_; }
  const MacroClock& clock() const { return clock_; }
  double budget_kg() const { return budget_kg_; }
  double emission_unit_kg() const { return unit_kg_; }
  int macro_decisions_last_episode() const { return macro_decisions_; }
  const UpdateStats& last_low_update() const { return low_stats_; }

 private:
  void phase(Phase p, int t) {
    if (hook_) hook_(p, t);
  }

  RunConfig config_;
  std::uint64_t seed_;
  AblationFlags flags_;
  std::shared_ptr<const Environment> env_;
  MacroClock clock_;
  double budget_kg_;
  double unit_kg_ = 1.0;  // fixed at construction, so cap adaptation rescales the allowance
  ConstraintLedger ledger_;
  FairnessState fairness_;
  LinearSoftmaxPolicy low_;
  LinearSoftmaxPolicy high_;
  ReturnBaseline low_baseline_;
  ReturnBaseline high_baseline_;
  Rng policy_rng_;
  std::int64_t global_step_ = 0;
  int macro_decisions_ = 0;
  UpdateStats low_stats_;
  PhaseHook hook_;
  std::vector<MacroLogEntry>* macro_log_ = nullptr;
  std::function<void(const FleetState&, const StepMetrics&)> observer_;
};

/// 85% (cap_fraction) of the mean E_T over a no-constraints probe on the first seed.
double calibrate_budget(const RunConfig& config);

struct AggregateRow {
  std::string metric;
  double mean_over_episodes_mean = 0.0;
  double mean_over_episodes_std = 0.0;
  double final_episode_mean = 0.0;
  double final_episode_std = 0.0;
};

/// Per-metric mean and population std over seeds, for the mean-over-episodes
/// and final-episode views. Throws RaggedInput on unequal episode counts.
std::vector<AggregateRow> aggregate(std::span<const std::vector<EpisodeRecord>> per_seed);
void write_aggregate_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows);

/// Per-episode means over seeds, one column per metric (cap included).
void write_plot_data(const std::filesystem::path& path, std::span<const std::vector<EpisodeRecord>> per_seed);

/// Reads every episodes_seed<S>.csv under `dir`, ordered by seed.
std::vector<std::vector<EpisodeRecord>> read_seed_csvs(const std::filesystem::path& dir);

struct ExperimentResult {
  double budget_kg = 0.0;
  std::vector<std::vector<EpisodeRecord>> per_seed;  // in config seed order
  std::vector<AggregateRow> aggregate;
};

/// Runs every seed (in parallel, at most ECOFAIR_THREADS workers) and writes
/// episodes_seed<S>.csv, macro_seed<S>.csv and aggregate.csv under the
/// output directory. An empty output path skips file output.
ExperimentResult run_experiment(const RunConfig& config);

/// Worker count: ECOFAIR_THREADS if set, otherwise hardware concurrency.
unsigned worker_count(std::size_t jobs);

struct ScalingPoint {
  int agents = 0;
  double seconds_per_episode = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  double exponent = 0.0;  // least-squares slope of log time on log N
};

/// Wall clock per episode for fleets of each size on the config's network.
ScalingReport scaling_probe(const RunConfig& config, std::span<const int> agents, int episodes = 4);

}  // namespace ecofair
