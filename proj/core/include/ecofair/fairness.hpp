#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace ecofair {

/// Which inequality functional drives the penalty: Gini, or 1 - MinMax.
enum class FairnessKind { gini, minmax };
enum class BetaSchedule { linear, tracking };

FairnessKind parse_fairness_kind(std::string_view s);
BetaSchedule parse_beta_schedule(std::string_view s);
const char* to_string(FairnessKind k);
const char* to_string(BetaSchedule s);

/// Gini coefficient of a non-negative cost vector, in [0, 1 - 1/N].
/// All-zero vectors and vectors with fewer than two entries score 0.
/// Throws DomainError on negative or non-finite entries.
double gini(std::span<const double> costs);

/// min c / max c in [0, 1]; 1 when every entry is zero.
double minmax(std::span<const double> costs);

/// Inequality score in [0, 1]; lower is fairer.
double phi(std::span<const double> costs, FairnessKind kind);

/// min(beta_max, slope * t).
double schedule_beta_linear(std::int64_t t, double slope, double beta_max);

/// min(beta_max, beta + eta (phi - target)+).
double schedule_beta_tracking(double beta, double phi_value, double target, double eta, double beta_max);

/// Subtracts beta * phi from every reward.
void apply_fairness_penalty(std::span<double> rewards, double beta, double phi_value);

struct FairnessParams {
  FairnessKind kind = FairnessKind::gini;
  BetaSchedule schedule = BetaSchedule::tracking;
  double zeta = 0.25;      // Gini ceiling
  double rho = 0.4;        // MinMax floor
  double beta_max = 50.0;
  double slope = 0.0;      // linear schedule, per step
  double eta_beta = 0.1;   // tracking schedule
};

/// Single-writer schedule state for one run.
class FairnessState {
 public:
  FairnessState() = default;
  explicit FairnessState(FairnessParams params);

  /// Scores `costs`, advances beta one step and accumulates (phi - target)+.
  /// Returns phi.
  double update(std::span<const double> costs);

  /// The threshold phi is tracked against: zeta for Gini, 1 - rho for MinMax.
  double target() const;

  const FairnessParams& params() const { return params_; }
  double beta() const { return beta_; }
  double last_phi() const { return last_phi_; }
  double cumulative_regret() const { return cumulative_regret_; }
  std::int64_t steps() const { return steps_; }

  /// Ablation: beta pinned at zero.
  void freeze() { frozen_ = true; beta_ = 0.0; }
  bool frozen() const { return frozen_; }

 private:
  FairnessParams params_;
  double beta_ = 0.0;
  double last_phi_ = 0.0;
  double cumulative_regret_ = 0.0;
  std::int64_t steps_ = 0;
  bool frozen_ = false;
};

}  // namespace ecofair
