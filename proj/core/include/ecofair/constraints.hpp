#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ecofair {

/// Explicit dual step size, for callers that do not use the 1/sqrt(t+1) schedule.
struct StepSize {
  double value;
};

/// eta_base / sqrt(t + 1).
double step_size(std::int64_t t, double eta_base);

enum class DualPersistence { persist, reset };

struct ConstraintParams {
  double budget = 0.0;                  // B, in ledger units
  int horizon = 50;                     // T
  std::optional<int> window;            // T_w; defaults to T
  std::optional<double> window_budget;  // B_w; defaults to B * T_w / T
  double eta_base = 0.05;
  double dual_cap = 1e3;
};

struct ViolationArchive {
  std::size_t steps = 0;
  double total = 0.0;
};

/// Online prices for the emissions budget and per-port capacity limits.
///
/// Emission values are in ledger units (the harness divides kg by its
/// configured emission unit) so that lambda * e stays commensurate with the
/// raw reward.
struct ConstraintLedger {
  double lambda = 0.0;
  std::vector<double> mu;  // berth duals, per port
  std::vector<double> nu;  // crane duals, per port
  double budget = 0.0;
  int window_length = 1;
  double window_budget = 0.0;
  double eta_base = 0.05;
  double dual_cap = 1e3;
  bool frozen = false;        // ablation: duals pinned at zero

  std::int64_t steps = 0;     // dual updates since the ledger was created or reset
  double cumulative_violation = 0.0;
  std::vector<double> violation_history;  // (e_t - B_w/T_w)+ for the current episode
  double episode_emissions = 0.0;
  std::vector<ViolationArchive> archive;

  /// Per-step allowance B_w / T_w.
  double allowance() const { return window_budget / window_length; }
  double max_mu() const;
  double max_nu() const;
};

/// Throws InvalidConfig for a non-positive budget, horizon, window or step size.
ConstraintLedger make_ledger(const ConstraintParams& params, std::size_t ports);

/// lambda <- [lambda + eta (e_t - B_w/T_w)]+, capped at dual_cap; records the
/// hinge violation and the emission.
void update_dual_emission(ConstraintLedger& ledger, double emission, StepSize eta);
void update_dual_emission(ConstraintLedger& ledger, double emission, std::int64_t t);

/// mu_p <- [mu_p + eta [q - C]+]+ and likewise nu_p.
void update_dual_capacity(ConstraintLedger& ledger, std::span<const int> berth_overflow,
                          std::span<const int> crane_overflow, StepSize eta);
void update_dual_capacity(ConstraintLedger& ledger, std::span<const int> berth_overflow,
                          std::span<const int> crane_overflow, std::int64_t t);

/// r - lambda e - sum_p mu_p [q_b - C_b]+ - sum_p nu_p [q_c - C_c]+.
double price_reward(double raw, const ConstraintLedger& ledger, double emission,
                    std::span<const int> berth_overflow, std::span<const int> crane_overflow);

/// Total price for one step; price_reward(r, ...) == r - constraint_penalty(...).
double constraint_penalty(const ConstraintLedger& ledger, double emission, std::span<const int> berth_overflow,
                          std::span<const int> crane_overflow);

/// Archives and clears the episode's violation history; `reset` also zeroes
/// the duals and the step counter.
void reset_episode(ConstraintLedger& ledger, DualPersistence mode);

/// Diagnostic Lagrangian value R - lambda (E - B).
double lagrangian(const ConstraintLedger& ledger, double episode_return);

}  // namespace ecofair
