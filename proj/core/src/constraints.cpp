#include "ecofair/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecofair/error.hpp"

namespace ecofair {

namespace {

double project(double x, double cap) { return std::clamp(x, 0.0, cap); }

void check_ports(const ConstraintLedger& ledger, std::span<const int> berth, std::span<const int> crane) {
  if (berth.size() != ledger.mu.size() || crane.size() != ledger.nu.size()) {
    throw DimensionMismatch("overflow vectors must have one entry per port");
  }
}

}  // namespace

double step_size(std::int64_t t, double eta_base) {
  return eta_base / std::sqrt(static_cast<double>(t) + 1.0);
}

double ConstraintLedger::max_mu() const {
  return mu.empty() ? 0.0 : *std::max_element(mu.begin(), mu.end());
}

double ConstraintLedger::max_nu() const {
  return nu.empty() ? 0.0 : *std::max_element(nu.begin(), nu.end());
}

ConstraintLedger make_ledger(const ConstraintParams& params, std::size_t ports) {
  if (!(params.budget > 0.0)) throw InvalidConfig("emission budget must be > 0");
  if (params.horizon < 1) throw InvalidConfig("horizon must be >= 1");
  if (!(params.eta_base > 0.0)) throw InvalidConfig("eta_base must be > 0");
  if (!(params.dual_cap > 0.0)) throw InvalidConfig("dual_cap must be > 0");
  ConstraintLedger ledger;
  ledger.budget = params.budget;
  ledger.window_length = params.window.value_or(params.horizon);
  if (ledger.window_length < 1) throw InvalidConfig("budget window must be >= 1 step");
  ledger.window_budget =
      params.window_budget.value_or(params.budget * ledger.window_length / static_cast<double>(params.horizon));
  if (!(ledger.window_budget > 0.0)) throw InvalidConfig("window budget must be > 0");
  ledger.eta_base = params.eta_base;
  ledger.dual_cap = params.dual_cap;
  ledger.mu.assign(ports, 0.0);
  ledger.nu.assign(ports, 0.0);
  return ledger;
}

void update_dual_emission(ConstraintLedger& ledger, double emission, StepSize eta) {
  if (!(emission >= 0.0)) throw DomainError("emission must be >= 0");
  const double excess = emission - ledger.allowance();
  if (!ledger.frozen) ledger.lambda = project(ledger.lambda + eta.value * excess, ledger.dual_cap);
  const double violation = std::max(0.0, excess);
  ledger.violation_history.push_back(violation);
  ledger.cumulative_violation += violation;
  ledger.episode_emissions += emission;
  ++ledger.steps;
}

void update_dual_emission(ConstraintLedger& ledger, double emission, std::int64_t t) {
  update_dual_emission(ledger, emission, StepSize{step_size(t, ledger.eta_base)});
}

void update_dual_capacity(ConstraintLedger& ledger, std::span<const int> berth_overflow,
                          std::span<const int> crane_overflow, StepSize eta) {
  check_ports(ledger, berth_overflow, crane_overflow);
  for (std::size_t p = 0; p < ledger.mu.size(); ++p) {
    if (berth_overflow[p] < 0 || crane_overflow[p] < 0) throw DomainError("overflow must be >= 0");
    if (ledger.frozen) continue;
    ledger.mu[p] = project(ledger.mu[p] + eta.value * berth_overflow[p], ledger.dual_cap);
    ledger.nu[p] = project(ledger.nu[p] + eta.value * crane_overflow[p], ledger.dual_cap);
  }
}

void update_dual_capacity(ConstraintLedger& ledger, std::span<const int> berth_overflow,
                          std::span<const int> crane_overflow, std::int64_t t) {
  update_dual_capacity(ledger, berth_overflow, crane_overflow, StepSize{step_size(t, ledger.eta_base)});
}

double constraint_penalty(const ConstraintLedger& ledger, double emission, std::span<const int> berth_overflow,
                          std::span<const int> crane_overflow) {
  check_ports(ledger, berth_overflow, crane_overflow);
  double penalty = ledger.lambda * emission;
  for (std::size_t p = 0; p < ledger.mu.size(); ++p) {
    penalty += ledger.mu[p] * std::max(0, berth_overflow[p]);
    penalty += ledger.nu[p] * std::max(0, crane_overflow[p]);
  }
  return penalty;
}

double price_reward(double raw, const ConstraintLedger& ledger, double emission,
                    std::span<const int> berth_overflow, std::span<const int> crane_overflow) {
  return raw - constraint_penalty(ledger, emission, berth_overflow, crane_overflow);
}

void reset_episode(ConstraintLedger& ledger, DualPersistence mode) {
  double total = 0.0;
  for (double v : ledger.violation_history) total += v;
  ledger.archive.push_back({ledger.violation_history.size(), total});
  ledger.violation_history.clear();
  ledger.episode_emissions = 0.0;
  if (mode == DualPersistence::reset) {
    ledger.lambda = 0.0;
    std::fill(ledger.mu.begin(), ledger.mu.end(), 0.0);
    std::fill(ledger.nu.begin(), ledger.nu.end(), 0.0);
    ledger.steps = 0;
  }
}

double lagrangian(const ConstraintLedger& ledger, double episode_return) {
  return episode_return - ledger.lambda * (ledger.episode_emissions - ledger.budget);
}

}  // namespace ecofair
