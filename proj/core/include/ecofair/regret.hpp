#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ecofair {

enum class RegretKind { emissions, fairness };

RegretKind parse_regret_kind(std::string_view s);
const char* to_string(RegretKind k);

struct SlopeFit {
  bool applicable = false;  // false when the series is identically zero in the range
  double slope = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log R(t) on log t for t in [t_lo, t_hi], sampled on
/// a log-spaced grid. `cumulative[t-1]` is R(t). Points with R(t) = 0 are
/// dropped; an all-zero range is not applicable.
SlopeFit fit_loglog_slope(std::span<const double> cumulative, std::int64_t t_lo, std::int64_t t_hi,
                          std::size_t grid = 200);

struct RegretParams {
  std::uint64_t seed = 7;
  std::int64_t fit_from = 1000;
  double threshold = 0.6;
  // emissions fixture
  double allowance = 1.0;      // B / T_w
  double eta_base = 0.5;
  double overshoot = 1.5;      // unpriced mean emission, in allowances
  // fairness fixture
  int agents = 10;
  double zeta = 0.25;
  double eta_beta = 0.1;
  double beta_max = 50.0;
  double response_scale = 1.0; // beta at which rate dispersion falls by 1/e
};

struct RegretReport {
  RegretKind kind = RegretKind::emissions;
  std::int64_t steps = 0;
  SlopeFit fit;                  // gating series
  bool pass = false;
  double threshold = 0.6;
  double total = 0.0;            // gating series at the last step
  // emissions fixture only
  double tail_mean = 0.0;        // mean emission over the last 20% of steps
  double allowance = 0.0;
  double final_price = 0.0;      // lambda, or beta for fairness
  SlopeFit per_step_hinge;       // sum (e_t - b)+, reported but not gating
};

/// Runs a responsive-actor fixture for `steps` (>= 10^4) steps.
///
/// Emissions: e_t = U[0, 2b] * overshoot / (1 + lambda_t) with the projected
/// dual step; the gate is the long-run violation [sum_t (e_t - b)]+.
/// Fairness: agent cost rates r_i = m + (r_i^0 - m) exp(-beta / scale) with
/// multiplicative noise U[0.5, 1.5]; the gate is sum_t (gini(c_t) - zeta)+.
RegretReport verify_regret(RegretKind kind, std::int64_t steps, const RegretParams& params = {});

/// Slope report for an arbitrary hinge stream (cumulated here).
RegretReport verify_stream(std::span<const double> hinges, const RegretParams& params = {});

}  // namespace ecofair
