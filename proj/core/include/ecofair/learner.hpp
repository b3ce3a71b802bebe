#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ecofair/environment.hpp"
#include "ecofair/rng.hpp"

namespace ecofair {

struct PolicySpec {
  std::size_t features = 1;
  std::size_t actions = 1;
  double temperature = 1.0;
  double learning_rate = 5e-4;
  double discount = 0.99;
  double entropy_coef = 0.01;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

struct ActionSample {
  std::size_t action = 0;
  double log_prob = 0.0;
};

/// Action mask: nonzero entries are selectable. An empty mask allows all.
using ActionMask = std::span<const std::uint8_t>;

/// pi(a | x) = softmax(W x / temperature), W stored row-major (actions x features).
class LinearSoftmaxPolicy {
 public:
  LinearSoftmaxPolicy() = default;
  /// Zero-initialised weights. Throws InvalidConfig on an invalid spec.
  explicit LinearSoftmaxPolicy(PolicySpec spec);

  const PolicySpec& spec() const { return spec_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }
  double& weight(std::size_t action, std::size_t feature) { return weights_[action * spec_.features + feature]; }
  double weight(std::size_t action, std::size_t feature) const {
    return weights_[action * spec_.features + feature];
  }

  std::vector<double> probabilities(std::span<const double> x, ActionMask mask = {}) const;
  ActionSample act(std::span<const double> x, Rng& rng, ActionMask mask = {}) const;
  double log_prob(std::span<const double> x, std::size_t action, ActionMask mask = {}) const;
  double entropy(std::span<const double> x, ActionMask mask = {}) const;

  /// d log pi(a|x) / dW = (onehot(a) - pi) x^T / temperature, accumulated
  /// into `out` with weight `scale`.
  void accumulate_grad_log_prob(std::span<const double> x, std::size_t action, double scale,
                                std::span<double> out, ActionMask mask = {}) const;
  std::vector<double> grad_log_prob(std::span<const double> x, std::size_t action, ActionMask mask = {}) const;

  /// dH/dW with H = -sum pi log pi.
  void accumulate_grad_entropy(std::span<const double> x, double scale, std::span<double> out,
                               ActionMask mask = {}) const;

  /// Text checkpoint: "ecofair-policy 1", then "actions features temperature",
  /// then `actions` lines of `features` weights each (row-major, %.17g).
  void save(std::ostream& out) const;
  static LinearSoftmaxPolicy load(std::istream& in);

  friend bool operator==(const LinearSoftmaxPolicy&, const LinearSoftmaxPolicy&) = default;

 private:
  void check_input(std::span<const double> x, ActionMask mask) const;
  std::vector<double> softmax(std::span<const double> x, ActionMask mask) const;

  PolicySpec spec_;
  std::vector<double> weights_;
};

/// One agent's episode: (features, action, shaped reward) triples.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::size_t feature_dim, std::size_t action_count = 0)
      : dim_(feature_dim), actions_count_(action_count) {}

  /// Appends a transition with zero reward; returns its index.
  std::size_t push(std::span<const double> x, std::size_t action, ActionMask mask = {});
  void add_reward(std::size_t i, double r) { rewards_.at(i) += r; }
  void set_reward(std::size_t i, double r) { rewards_.at(i) = r; }

  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  std::size_t feature_dim() const { return dim_; }
  std::span<const double> features(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
  std::size_t action(std::size_t i) const { return actions_[i]; }
  double reward(std::size_t i) const { return rewards_[i]; }
  std::span<const double> rewards() const { return rewards_; }
  ActionMask mask(std::size_t i) const;

  void clear();

 private:
  std::size_t dim_ = 0;
  std::size_t actions_count_ = 0;
  std::vector<double> features_;
  std::vector<std::size_t> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> masks_;  // actions_count_ entries per step when masked
};

/// Discounted returns-to-go.
std::vector<double> returns_to_go(std::span<const double> rewards, double discount);

/// Running mean of the return-to-go at each time index.
class ReturnBaseline {
 public:
  explicit ReturnBaseline(double decay = 0.05) : decay_(decay) {}
  double value(std::size_t t) const { return t < mean_.size() ? mean_[t] : 0.0; }
  void observe(std::size_t t, double ret);
  double decay() const { return decay_; }

 private:
  double decay_;
  std::vector<double> mean_;
  std::vector<bool> seen_;
};

struct UpdateStats {
  double gradient_norm = 0.0;
  double mean_advantage = 0.0;
  double mean_entropy = 0.0;
  std::size_t samples = 0;
};

struct UpdateOptions {
  /// Multiplies the summed gradient (e.g. 1 / batch size).
  double scale = 1.0;
  /// Divide advantages by their batch standard deviation.
  bool normalize_advantages = false;
};

/// One policy-gradient step:
///   W += lr * scale * sum_t [A_t grad log pi(a_t|x_t) + entropy_coef grad H(x_t)]
/// with A_t the return-to-go minus the running baseline. Throws
/// NonFiniteGradient (leaving W untouched) if the gradient is not finite.
UpdateStats update(LinearSoftmaxPolicy& policy, std::span<const Trajectory> batch, ReturnBaseline& baseline,
                   const UpdateOptions& options = {});

// ---------------------------------------------------------------------------
// Low-level features and the micro action space.

struct FeatureScales {
  double hull_reference = 2000.0;    // kg/h
  double cost_rate_reference = 5.0;  // cost units per hour
  int tau_h = 10;                    // macro period, for distance and slack scaling
};

/// Low-level feature layout, in order:
///   0 bias (1)
///   1 speed / v_max
///   2 fuel level / capacity
///   3 position fraction on the current lane
///   4-8 status one-hot (ready, transit, anchored, queued, berthed)
///   9 local berth queue / berth capacity
///  10 local berthed / berth capacity
///  11 local crane queue / crane capacity
///  12-14 local weather one-hot (calm, swell, storm)
///  15 remaining envelope fraction
///  16 failed flag
///  17 hull coefficient / hull_reference
///  18 own cost rate: c_i / ((t + 1) cost_rate_reference)
///  19 window slack: (window_end - t - remaining / v_ref) / tau_h, clipped to [-1, 1], 0 when not en route
///  20 remaining distance / (v_ref tau_h), clipped to [0, 2]
inline constexpr std::size_t kMicroFeatureCount = 21;

std::vector<double> featurize(const Observation& obs, const FeatureScales& scales = {});
void featurize_into(const Observation& obs, const FeatureScales& scales, std::span<double> out);

/// Micro actions are speed level x mode, index = mode * kSpeedLevels + level.
/// Modes: proceed (request berth and crane), hold (no requests), detour.
enum class MicroMode : std::uint8_t { proceed = 0, hold = 1, detour = 2 };
inline constexpr std::size_t kMicroModes = 3;
inline constexpr std::size_t kMicroActionCount = kSpeedLevels * kMicroModes;

MicroAction decode_micro_action(std::size_t index);
std::size_t encode_micro_action(std::size_t speed_level, MicroMode mode);

/// Actions that have distinct effects in the vessel's current status:
/// transit vessels pick a speed (and may detour once per lane), ready vessels
/// pick a departure speed, and docked vessels choose whether to request service.
std::vector<std::uint8_t> micro_action_mask(const Observation& obs);

// ---------------------------------------------------------------------------
// Ablation modes.

enum class BaselineMode { full, no_constraints, no_fairness, flat_decentralised, centralised, hier_only };

struct AblationFlags {
  BaselineMode mode = BaselineMode::full;
  bool constraints = true;   // lambda, mu, nu updated
  bool fairness = true;      // beta scheduled
  bool hierarchy = true;     // learned macro policy every tau_H steps
  bool centralised = false;  // one policy over all observations
};

BaselineMode parse_baseline_mode(std::string_view s);
const char* to_string(BaselineMode m);
AblationFlags configure_baseline(BaselineMode mode);

/// Centralised input for `agent`: per-agent feature blocks concatenated in
/// cyclic order starting at `agent`, so one shared matrix serves every vessel.
/// Each block keeps its own bias entry; the length is N * kMicroFeatureCount.
std::vector<double> centralised_features(std::span<const std::vector<double>> per_agent, std::size_t agent);

}  // namespace ecofair
