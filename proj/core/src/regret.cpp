#include "ecofair/regret.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ecofair/constraints.hpp"
#include "ecofair/error.hpp"
#include "ecofair/fairness.hpp"
#include "ecofair/rng.hpp"

namespace ecofair {

RegretKind parse_regret_kind(std::string_view s) {
  if (s == "emissions") return RegretKind::emissions;
  if (s == "fairness") return RegretKind::fairness;
  throw InvalidConfig("unknown regret kind '" + std::string(s) + "'");
}

const char* to_string(RegretKind k) { return k == RegretKind::emissions ? "emissions" : "fairness"; }

SlopeFit fit_loglog_slope(std::span<const double> cumulative, std::int64_t t_lo, std::int64_t t_hi,
                          std::size_t grid) {
  SlopeFit fit;
  t_hi = std::min<std::int64_t>(t_hi, static_cast<std::int64_t>(cumulative.size()));
  t_lo = std::max<std::int64_t>(1, t_lo);
  if (t_hi <= t_lo || grid < 2) return fit;
  const double a = std::log(static_cast<double>(t_lo));
  const double b = std::log(static_cast<double>(t_hi));
  std::vector<double> xs;
  std::vector<double> ys;
  std::int64_t last = 0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double u = a + (b - a) * static_cast<double>(k) / static_cast<double>(grid - 1);
    const auto t = std::clamp<std::int64_t>(std::llround(std::exp(u)), t_lo, t_hi);
    if (t == last) continue;
    last = t;
    const double r = cumulative[static_cast<std::size_t>(t - 1)];
    if (!(r > 0.0)) continue;
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(r));
  }
  fit.points = xs.size();
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx <= 0.0) return fit;
  fit.applicable = true;
  fit.slope = sxy / sxx;
  return fit;
}

namespace {

void finish(RegretReport& r, const std::vector<double>& cumulative, const RegretParams& p) {
  r.fit = fit_loglog_slope(cumulative, p.fit_from, r.steps);
  r.total = cumulative.empty() ? 0.0 : cumulative.back();
  r.threshold = p.threshold;
  r.pass = !r.fit.applicable || r.fit.slope <= p.threshold;
}

RegretReport emissions_fixture(std::int64_t steps, const RegretParams& p) {
  RegretReport r;
  r.kind = RegretKind::emissions;
  r.steps = steps;
  r.allowance = p.allowance;
  ConstraintParams cp;
  cp.horizon = 1;
  cp.budget = p.allowance;
  cp.eta_base = p.eta_base;
  auto ledger = make_ledger(cp, 0);
  Rng rng(p.seed);

  std::vector<double> long_run(static_cast<std::size_t>(steps));
  std::vector<double> hinge(static_cast<std::size_t>(steps));
  double net = 0.0;
  double tail = 0.0;
  const auto tail_from = steps - steps / 5;
  for (std::int64_t t = 0; t < steps; ++t) {
    const double e = rng.uniform(0.0, 2.0 * p.allowance) * p.overshoot / (1.0 + ledger.lambda);
    update_dual_emission(ledger, e, t);
    net += e - p.allowance;
    long_run[static_cast<std::size_t>(t)] = std::max(0.0, net);
    hinge[static_cast<std::size_t>(t)] = ledger.cumulative_violation;
    if (t >= tail_from) tail += e;
    // The ledger keeps the per-step history for episodes; the fixture is one long episode.
    ledger.violation_history.clear();
  }
  r.tail_mean = tail / static_cast<double>(steps - tail_from);
  r.final_price = ledger.lambda;
  finish(r, long_run, p);
  r.per_step_hinge = fit_loglog_slope(hinge, p.fit_from, steps);
  return r;
}

RegretReport fairness_fixture(std::int64_t steps, const RegretParams& p) {
  RegretReport r;
  r.kind = RegretKind::fairness;
  r.steps = steps;
  if (p.agents < 2) throw InvalidConfig("fairness fixture needs >= 2 agents");
  Rng rng(p.seed);
  const auto n = static_cast<std::size_t>(p.agents);
  // Base rates spread geometrically from 1 to 8 (gini about 0.38).
  std::vector<double> base(n);
  for (std::size_t i = 0; i < n; ++i) base[i] = std::pow(8.0, static_cast<double>(i) / static_cast<double>(n - 1));
  const double mean = std::accumulate(base.begin(), base.end(), 0.0) / static_cast<double>(n);

  FairnessParams fp;
  fp.kind = FairnessKind::gini;
  fp.schedule = BetaSchedule::tracking;
  fp.zeta = p.zeta;
  fp.eta_beta = p.eta_beta;
  fp.beta_max = p.beta_max;
  FairnessState state(fp);

  std::vector<double> costs(n, 0.0);
  std::vector<double> cumulative(static_cast<std::size_t>(steps));
  for (std::int64_t t = 0; t < steps; ++t) {
    const double spread = std::exp(-state.beta() / p.response_scale);
    for (std::size_t i = 0; i < n; ++i) {
      costs[i] += (mean + (base[i] - mean) * spread) * rng.uniform(0.5, 1.5);
    }
    state.update(costs);
    cumulative[static_cast<std::size_t>(t)] = state.cumulative_regret();
  }
  r.final_price = state.beta();
  finish(r, cumulative, p);
  return r;
}

}  // namespace

RegretReport verify_regret(RegretKind kind, std::int64_t steps, const RegretParams& params) {
  if (steps < 10000) throw InvalidConfig("regret verification needs at least 10^4 steps");
  return kind == RegretKind::emissions ? emissions_fixture(steps, params) : fairness_fixture(steps, params);
}

RegretReport verify_stream(std::span<const double> hinges, const RegretParams& params) {
  RegretReport r;
  r.steps = static_cast<std::int64_t>(hinges.size());
  std::vector<double> cumulative(hinges.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < hinges.size(); ++i) {
    if (hinges[i] < 0.0) throw DomainError("hinge values must be >= 0");
    acc += hinges[i];
    cumulative[i] = acc;
  }
  finish(r, cumulative, params);
  return r;
}

}  // namespace ecofair
