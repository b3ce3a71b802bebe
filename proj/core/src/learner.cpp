#include "ecofair/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "ecofair/error.hpp"

namespace ecofair {

LinearSoftmaxPolicy::LinearSoftmaxPolicy(PolicySpec spec) : spec_(spec) {
  if (spec_.features == 0 || spec_.actions == 0) throw InvalidConfig("policy needs >= 1 feature and action");
  if (!(spec_.temperature > 0.0) || !std::isfinite(spec_.temperature)) {
    throw InvalidConfig("temperature must be positive");
  }
  if (!(spec_.discount > 0.0 && spec_.discount <= 1.0)) throw InvalidConfig("discount must be in (0, 1]");
  if (!(spec_.learning_rate >= 0.0) || !std::isfinite(spec_.learning_rate)) {
    throw InvalidConfig("learning rate must be finite and >= 0");
  }
  if (!(spec_.entropy_coef >= 0.0)) throw InvalidConfig("entropy coefficient must be >= 0");
  weights_.assign(spec_.features * spec_.actions, 0.0);
}

void LinearSoftmaxPolicy::check_input(std::span<const double> x, ActionMask mask) const {
  if (x.size() != spec_.features) {
    throw DimensionMismatch("policy expects " + std::to_string(spec_.features) + " features, got " +
                            std::to_string(x.size()));
  }
  if (!mask.empty() && mask.size() != spec_.actions) {
    throw DimensionMismatch("mask has " + std::to_string(mask.size()) + " entries for " +
                            std::to_string(spec_.actions) + " actions");
  }
}

std::vector<double> LinearSoftmaxPolicy::softmax(std::span<const double> x, ActionMask mask) const {
  check_input(x, mask);
  const auto na = spec_.actions;
  const auto nf = spec_.features;
  std::vector<double> z(na, -std::numeric_limits<double>::infinity());
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < na; ++a) {
    if (!mask.empty() && mask[a] == 0) continue;
    const double* w = weights_.data() + a * nf;
    double s = 0.0;
    for (std::size_t f = 0; f < nf; ++f) s += w[f] * x[f];
    z[a] = s / spec_.temperature;
    zmax = std::max(zmax, z[a]);
  }
  if (zmax == -std::numeric_limits<double>::infinity()) throw DomainError("action mask excludes every action");
  double total = 0.0;
  for (auto& v : z) {
    v = std::isinf(v) && v < 0 ? 0.0 : std::exp(v - zmax);
    total += v;
  }
  for (auto& v : z) v /= total;
  return z;
}

std::vector<double> LinearSoftmaxPolicy::probabilities(std::span<const double> x, ActionMask mask) const {
  return softmax(x, mask);
}

ActionSample LinearSoftmaxPolicy::act(std::span<const double> x, Rng& rng, ActionMask mask) const {
  const auto p = softmax(x, mask);
  const auto a = rng.categorical(p);
  return {a, std::log(p[a])};
}

double LinearSoftmaxPolicy::log_prob(std::span<const double> x, std::size_t action, ActionMask mask) const {
  if (action >= spec_.actions) throw DomainError("action index out of range");
  const auto p = softmax(x, mask);
  if (p[action] == 0.0) throw DomainError("action is masked");
  return std::log(p[action]);
}

double LinearSoftmaxPolicy::entropy(std::span<const double> x, ActionMask mask) const {
  const auto p = softmax(x, mask);
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

void LinearSoftmaxPolicy::accumulate_grad_log_prob(std::span<const double> x, std::size_t action, double scale,
                                                   std::span<double> out, ActionMask mask) const {
  if (action >= spec_.actions) throw DomainError("action index out of range");
  if (out.size() != weights_.size()) throw DimensionMismatch("gradient buffer size");
  const auto p = softmax(x, mask);
  const double c = scale / spec_.temperature;
  const auto nf = spec_.features;
  for (std::size_t a = 0; a < spec_.actions; ++a) {
    const double g = ((a == action ? 1.0 : 0.0) - p[a]) * c;
    if (g == 0.0) continue;
    double* row = out.data() + a * nf;
    for (std::size_t f = 0; f < nf; ++f) row[f] += g * x[f];
  }
}

std::vector<double> LinearSoftmaxPolicy::grad_log_prob(std::span<const double> x, std::size_t action,
                                                       ActionMask mask) const {
  std::vector<double> g(weights_.size(), 0.0);
  accumulate_grad_log_prob(x, action, 1.0, g, mask);
  return g;
}

void LinearSoftmaxPolicy::accumulate_grad_entropy(std::span<const double> x, double scale, std::span<double> out,
                                                  ActionMask mask) const {
  if (out.size() != weights_.size()) throw DimensionMismatch("gradient buffer size");
  const auto p = softmax(x, mask);
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  const double c = scale / spec_.temperature;
  const auto nf = spec_.features;
  for (std::size_t a = 0; a < spec_.actions; ++a) {
    if (p[a] == 0.0) continue;
    // dH/dz_a = -p_a (log p_a + H)
    const double g = -p[a] * (std::log(p[a]) + h) * c;
    double* row = out.data() + a * nf;
    for (std::size_t f = 0; f < nf; ++f) row[f] += g * x[f];
  }
}

void LinearSoftmaxPolicy::save(std::ostream& out) const {
  char buf[32];
  out << "ecofair-policy 1\n" << spec_.actions << ' ' << spec_.features << ' ';
  std::snprintf(buf, sizeof buf, "%.17g", spec_.temperature);
  out << buf << '\n';
  for (std::size_t a = 0; a < spec_.actions; ++a) {
    for (std::size_t f = 0; f < spec_.features; ++f) {
      std::snprintf(buf, sizeof buf, "%.17g", weight(a, f));
      out << (f ? " " : "") << buf;
    }
    out << '\n';
  }
}

LinearSoftmaxPolicy LinearSoftmaxPolicy::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "ecofair-policy" || version != 1) {
    throw InvalidConfig("not an ecofair-policy v1 checkpoint");
  }
  PolicySpec spec;
  if (!(in >> spec.actions >> spec.features >> spec.temperature)) throw InvalidConfig("truncated checkpoint header");
  LinearSoftmaxPolicy policy(spec);
  for (auto& w : policy.weights_) {
    if (!(in >> w)) throw InvalidConfig("truncated checkpoint weights");
    if (!std::isfinite(w)) throw InvalidConfig("checkpoint contains a non-finite weight");
  }
  return policy;
}

std::size_t Trajectory::push(std::span<const double> x, std::size_t action, ActionMask mask) {
  if (x.size() != dim_) throw DimensionMismatch("trajectory feature length");
  features_.insert(features_.end(), x.begin(), x.end());
  actions_.push_back(action);
  rewards_.push_back(0.0);
  if (actions_count_ > 0) {
    if (mask.empty()) {
      masks_.insert(masks_.end(), actions_count_, std::uint8_t{1});
    } else {
      if (mask.size() != actions_count_) throw DimensionMismatch("trajectory mask length");
      masks_.insert(masks_.end(), mask.begin(), mask.end());
    }
  }
  return actions_.size() - 1;
}

ActionMask Trajectory::mask(std::size_t i) const {
  if (actions_count_ == 0) return {};
  return {masks_.data() + i * actions_count_, actions_count_};
}

void Trajectory::clear() {
  features_.clear();
  actions_.clear();
  rewards_.clear();
  masks_.clear();
}

std::vector<double> returns_to_go(std::span<const double> rewards, double discount) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + discount * acc;
    g[i] = acc;
  }
  return g;
}

void ReturnBaseline::observe(std::size_t t, double ret) {
  if (t >= mean_.size()) {
    mean_.resize(t + 1, 0.0);
    seen_.resize(t + 1, false);
  }
  if (!seen_[t]) {
    mean_[t] = ret;
    seen_[t] = true;
  } else {
    mean_[t] += decay_ * (ret - mean_[t]);
  }
}

UpdateStats update(LinearSoftmaxPolicy& policy, std::span<const Trajectory> batch, ReturnBaseline& baseline,
                   const UpdateOptions& options) {
  const auto& spec = policy.spec();
  UpdateStats stats;

  std::vector<std::vector<double>> advantages;
  advantages.reserve(batch.size());
  double sum = 0.0;
  double sumsq = 0.0;
  for (const auto& traj : batch) {
    if (!traj.empty() && traj.feature_dim() != spec.features) throw DimensionMismatch("trajectory feature length");
    auto g = returns_to_go(traj.rewards(), spec.discount);
    for (std::size_t t = 0; t < g.size(); ++t) {
      g[t] -= baseline.value(t);
      sum += g[t];
      sumsq += g[t] * g[t];
    }
    stats.samples += g.size();
    advantages.push_back(std::move(g));
  }
  if (stats.samples == 0) return stats;
  const double n = static_cast<double>(stats.samples);
  stats.mean_advantage = sum / n;
  double norm = 1.0;
  if (options.normalize_advantages) {
    const double var = std::max(0.0, sumsq / n - stats.mean_advantage * stats.mean_advantage);
    norm = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
  }

  std::vector<double> grad(policy.weights().size(), 0.0);
  double entropy_total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& traj = batch[b];
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto x = traj.features(t);
      const auto mask = traj.mask(t);
      const double adv = advantages[b][t] * norm;
      if (adv != 0.0) policy.accumulate_grad_log_prob(x, traj.action(t), adv, grad, mask);
      if (spec.entropy_coef > 0.0) policy.accumulate_grad_entropy(x, spec.entropy_coef, grad, mask);
      entropy_total += policy.entropy(x, mask);
    }
  }
  stats.mean_entropy = entropy_total / n;

  double sq = 0.0;
  for (double g : grad) sq += g * g;
  stats.gradient_norm = std::sqrt(sq) * options.scale;
  if (!std::isfinite(stats.gradient_norm)) {
    throw NonFiniteGradient("policy gradient is not finite (mean advantage " + std::to_string(stats.mean_advantage) +
                            ", samples " + std::to_string(stats.samples) + ")");
  }

  auto w = policy.weights();
  const double step = spec.learning_rate * options.scale;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += step * grad[i];

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto g = returns_to_go(batch[b].rewards(), spec.discount);
    for (std::size_t t = 0; t < g.size(); ++t) baseline.observe(t, g[t]);
  }
  return stats;
}

// ---------------------------------------------------------------------------

void featurize_into(const Observation& o, const FeatureScales& scales, std::span<double> out) {
  if (out.size() != kMicroFeatureCount) throw DimensionMismatch("feature buffer length");
  std::fill(out.begin(), out.end(), 0.0);
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  const double tau = std::max(1, scales.tau_h);

  out[0] = 1.0;
  out[1] = ratio(o.speed, o.v_max);
  out[2] = ratio(o.fuel_level, o.fuel_capacity);
  out[3] = o.position_fraction;
  out[4 + static_cast<std::size_t>(o.status)] = 1.0;
  out[9] = ratio(o.berth_queue, o.berth_capacity);
  out[10] = ratio(o.berthed, o.berth_capacity);
  out[11] = ratio(o.crane_queue, o.crane_capacity);
  out[12 + static_cast<std::size_t>(o.weather)] = 1.0;
  if (o.directive.envelope > 0.0) {
    out[15] = std::clamp((o.directive.envelope - o.window_emissions) / o.directive.envelope, 0.0, 1.0);
  }
  out[16] = o.healthy ? 0.0 : 1.0;
  out[17] = ratio(o.hull_coefficient, scales.hull_reference);
  out[18] = ratio(o.cumulative_cost, (o.t + 1) * scales.cost_rate_reference);
  const bool en_route = o.remaining_distance_nm > 0.0;
  if (en_route && o.v_ref > 0.0) {
    const double slack = o.directive.window_end - o.t - o.remaining_distance_nm / o.v_ref;
    out[19] = std::clamp(slack / tau, -1.0, 1.0);
    out[20] = std::clamp(o.remaining_distance_nm / (o.v_ref * tau), 0.0, 2.0);
  }
}

std::vector<double> featurize(const Observation& obs, const FeatureScales& scales) {
  std::vector<double> x(kMicroFeatureCount);
  featurize_into(obs, scales, x);
  return x;
}

MicroAction decode_micro_action(std::size_t index) {
  if (index >= kMicroActionCount) throw DomainError("micro action index out of range");
  MicroAction a;
  a.speed_level = index % kSpeedLevels;
  const auto mode = static_cast<MicroMode>(index / kSpeedLevels);
  a.berth_request = a.crane_request = mode != MicroMode::hold;
  a.detour = mode == MicroMode::detour;
  return a;
}

std::size_t encode_micro_action(std::size_t speed_level, MicroMode mode) {
  if (speed_level >= kSpeedLevels) throw DomainError("speed level out of range");
  return static_cast<std::size_t>(mode) * kSpeedLevels + speed_level;
}

std::vector<std::uint8_t> micro_action_mask(const Observation& o) {
  std::vector<std::uint8_t> mask(kMicroActionCount, 0);
  auto allow = [&](std::size_t level, MicroMode mode) { mask[encode_micro_action(level, mode)] = 1; };
  switch (o.status) {
    case VesselStatus::transit:
      for (std::size_t l = 0; l < kSpeedLevels; ++l) {
        allow(l, MicroMode::proceed);
        if (!o.detoured) allow(l, MicroMode::detour);
      }
      break;
    case VesselStatus::ready:
      if (o.remaining_distance_nm > 0.0) {
        for (std::size_t l = 0; l < kSpeedLevels; ++l) allow(l, MicroMode::proceed);
      } else {
        allow(0, MicroMode::proceed);
      }
      break;
    case VesselStatus::anchored:
    case VesselStatus::berthed:
      allow(0, MicroMode::proceed);
      allow(0, MicroMode::hold);
      break;
    case VesselStatus::queued:
      allow(0, MicroMode::proceed);
      break;
  }
  return mask;
}

// ---------------------------------------------------------------------------

BaselineMode parse_baseline_mode(std::string_view s) {
  if (s == "full") return BaselineMode::full;
  if (s == "no-constraints") return BaselineMode::no_constraints;
  if (s == "no-fairness") return BaselineMode::no_fairness;
  if (s == "flat-decentralised") return BaselineMode::flat_decentralised;
  if (s == "centralised") return BaselineMode::centralised;
  if (s == "hier-only") return BaselineMode::hier_only;
  throw InvalidConfig("unknown baseline mode '" + std::string(s) + "'");
}

const char* to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::full: return "full";
    case BaselineMode::no_constraints: return "no-constraints";
    case BaselineMode::no_fairness: return "no-fairness";
    case BaselineMode::flat_decentralised: return "flat-decentralised";
    case BaselineMode::centralised: return "centralised";
    case BaselineMode::hier_only: return "hier-only";
  }
  return "?";
}

AblationFlags configure_baseline(BaselineMode mode) {
  AblationFlags f;
  f.mode = mode;
  switch (mode) {
    case BaselineMode::full: break;
    case BaselineMode::no_constraints: f.constraints = false; break;
    case BaselineMode::no_fairness: f.fairness = false; break;
    case BaselineMode::flat_decentralised:
      f.constraints = f.fairness = f.hierarchy = false;
      break;
    case BaselineMode::centralised: f.centralised = true; break;
    case BaselineMode::hier_only: f.constraints = f.fairness = false; break;
  }
  return f;
}

std::vector<double> centralised_features(std::span<const std::vector<double>> per_agent, std::size_t agent) {
  const auto n = per_agent.size();
  if (agent >= n) throw UnknownAgent("agent " + std::to_string(agent));
  const auto d = per_agent.front().size();
  std::vector<double> x;
  x.reserve(n * d);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& block = per_agent[(agent + k) % n];
    if (block.size() != d) throw DimensionMismatch("ragged per-agent features");
    x.insert(x.end(), block.begin(), block.end());
  }
  return x;
}

}  // namespace ecofair
