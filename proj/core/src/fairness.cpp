#include "ecofair/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ecofair/error.hpp"

namespace ecofair {

namespace {

void check_costs(std::span<const double> costs) {
  for (double c : costs) {
    if (!std::isfinite(c)) throw DomainError("cost vector contains a non-finite entry");
    if (c < 0.0) throw DomainError("cost vector contains a negative entry");
  }
}

}  // namespace

FairnessKind parse_fairness_kind(std::string_view s) {
  if (s == "gini") return FairnessKind::gini;
  if (s == "minmax") return FairnessKind::minmax;
  throw InvalidConfig("unknown fairness functional '" + std::string(s) + "'");
}

BetaSchedule parse_beta_schedule(std::string_view s) {
  if (s == "linear") return BetaSchedule::linear;
  if (s == "tracking") return BetaSchedule::tracking;
  throw InvalidConfig("unknown beta schedule '" + std::string(s) + "'");
}

const char* to_string(FairnessKind k) { return k == FairnessKind::gini ? "gini" : "minmax"; }
const char* to_string(BetaSchedule s) { return s == BetaSchedule::linear ? "linear" : "tracking"; }

double gini(std::span<const double> costs) {
  check_costs(costs);
  const auto n = costs.size();
  if (n < 2) return 0.0;
  std::vector<double> sorted(costs.begin(), costs.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += sorted[i];
    weighted += static_cast<double>(i + 1) * sorted[i];
  }
  if (total == 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  const double g = 2.0 * weighted / (nd * total) - (nd + 1.0) / nd;
  return std::clamp(g, 0.0, (nd - 1.0) / nd);
}

double minmax(std::span<const double> costs) {
  check_costs(costs);
  if (costs.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
  if (*hi == 0.0) return 1.0;
  return *lo / *hi;
}

double phi(std::span<const double> costs, FairnessKind kind) {
  return kind == FairnessKind::gini ? gini(costs) : 1.0 - minmax(costs);
}

double schedule_beta_linear(std::int64_t t, double slope, double beta_max) {
  return std::min(beta_max, slope * static_cast<double>(t));
}

double schedule_beta_tracking(double beta, double phi_value, double target, double eta, double beta_max) {
  return std::min(beta_max, beta + eta * std::max(0.0, phi_value - target));
}

void apply_fairness_penalty(std::span<double> rewards, double beta, double phi_value) {
  const double penalty = beta * phi_value;
  for (double& r : rewards) r -= penalty;
}

FairnessState::FairnessState(FairnessParams params) : params_(params) {
  if (!(params_.beta_max >= 0.0)) throw InvalidConfig("beta_max must be >= 0");
  if (!(params_.slope >= 0.0)) throw InvalidConfig("beta slope must be >= 0");
  if (!(params_.eta_beta >= 0.0)) throw InvalidConfig("eta_beta must be >= 0");
  if (!(params_.zeta >= 0.0 && params_.zeta <= 1.0)) throw InvalidConfig("zeta must lie in [0,1]");
  if (!(params_.rho >= 0.0 && params_.rho <= 1.0)) throw InvalidConfig("rho must lie in [0,1]");
}

double FairnessState::target() const {
  return params_.kind == FairnessKind::gini ? params_.zeta : 1.0 - params_.rho;
}

double FairnessState::update(std::span<const double> costs) {
  last_phi_ = phi(costs, params_.kind);
  ++steps_;
  if (!frozen_) {
    if (params_.schedule == BetaSchedule::linear) {
      beta_ = schedule_beta_linear(steps_, params_.slope, params_.beta_max);
    } else {
      beta_ = schedule_beta_tracking(beta_, last_phi_, target(), params_.eta_beta, params_.beta_max);
    }
  }
  cumulative_regret_ += std::max(0.0, last_phi_ - target());
  return last_phi_;
}

}  // namespace ecofair
