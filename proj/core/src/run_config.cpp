#include "ecofair/run_config.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ecofair/error.hpp"
#include "json_util.hpp"

namespace ecofair {

namespace {

using nlohmann::json;
using detail::get_or;
using detail::reject_unknown_keys;

void parse_constraints(const json& j, ConstraintSettings& c) {
  reject_unknown_keys(j,
                      {"budget", "cap_fraction", "calibration_episodes", "calibration", "window", "eta_base", "dual_cap",
                       "emission_unit_kg", "dual_persistence"},
                      "constraints");
  if (auto it = j.find("budget"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto") throw InvalidConfig("constraints.budget must be a number or \"auto\"");
    } else if (it->is_number()) {
      c.budget_kg = it->get<double>();
    } else {
      throw InvalidConfig("constraints.budget must be a number or \"auto\"");
    }
  }
  c.cap_fraction = get_or(j, "cap_fraction", c.cap_fraction);
  c.calibration_episodes = get_or(j, "calibration_episodes", c.calibration_episodes);
  const auto cal = get_or<std::string>(j, "calibration", "trained");
  if (cal != "trained" && cal != "probe") throw InvalidConfig("constraints.calibration must be \"trained\" or \"probe\"");
  c.calibrate_trained = cal == "trained";
  if (j.contains("window") && !j["window"].is_null()) c.window = get_or(j, "window", 0);
  c.eta_base = get_or(j, "eta_base", c.eta_base);
  c.dual_cap = get_or(j, "dual_cap", c.dual_cap);
  if (auto it = j.find("emission_unit_kg"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto") throw InvalidConfig("emission_unit_kg must be a number or \"auto\"");
    } else {
      c.emission_unit_kg = get_or(j, "emission_unit_kg", 0.0);
    }
  }
  const auto mode = get_or<std::string>(j, "dual_persistence", "persist");
  if (mode == "persist") {
    c.persistence = DualPersistence::persist;
  } else if (mode == "reset") {
    c.persistence = DualPersistence::reset;
  } else {
    throw InvalidConfig("dual_persistence must be \"persist\" or \"reset\"");
  }
}

void parse_fairness(const json& j, RunConfig& rc) {
  reject_unknown_keys(j, {"kind", "schedule", "zeta", "rho", "beta_max", "slope", "eta_beta"}, "fairness");
  auto& f = rc.fairness;
  f.kind = parse_fairness_kind(get_or<std::string>(j, "kind", to_string(f.kind)));
  f.schedule = parse_beta_schedule(get_or<std::string>(j, "schedule", to_string(f.schedule)));
  f.zeta = get_or(j, "zeta", f.zeta);
  f.rho = get_or(j, "rho", f.rho);
  f.beta_max = get_or(j, "beta_max", f.beta_max);
  f.eta_beta = get_or(j, "eta_beta", f.eta_beta);
  if (j.contains("slope") && !j["slope"].is_null()) {
    f.slope = get_or(j, "slope", 0.0);
    rc.fairness_slope_set = true;
  }
}

void parse_hierarchy(const json& j, HierarchySettings& h) {
  reject_unknown_keys(j, {"tau_h", "route_candidates", "window_offsets", "window_slack", "cap_adaptation", "cap_delta"},
                      "hierarchy");
  h.tau_h = get_or(j, "tau_h", h.tau_h);
  h.macro.route_candidates = get_or(j, "route_candidates", h.macro.route_candidates);
  h.macro.window_offsets = get_or(j, "window_offsets", h.macro.window_offsets);
  h.macro.window_slack = get_or(j, "window_slack", h.macro.window_slack);
  h.cap_adaptation.enabled = get_or(j, "cap_adaptation", h.cap_adaptation.enabled);
  h.cap_adaptation.delta = get_or(j, "cap_delta", h.cap_adaptation.delta);
}

void parse_learner(const json& j, LearnerSettings& l) {
  reject_unknown_keys(j,
                      {"learning_rate", "high_level_learning_rate", "discount", "entropy_coef", "temperature",
                       "baseline_decay", "normalize_advantages", "average_over_agents", "hull_reference", "cost_rate_reference"},
                      "learner");
  l.learning_rate = get_or(j, "learning_rate", l.learning_rate);
  l.high_level_learning_rate = get_or(j, "high_level_learning_rate", l.learning_rate);
  l.discount = get_or(j, "discount", l.discount);
  l.entropy_coef = get_or(j, "entropy_coef", l.entropy_coef);
  l.temperature = get_or(j, "temperature", l.temperature);
  l.baseline_decay = get_or(j, "baseline_decay", l.baseline_decay);
  l.normalize_advantages = get_or(j, "normalize_advantages", l.normalize_advantages);
  l.average_over_agents = get_or(j, "average_over_agents", l.average_over_agents);
  l.scales.hull_reference = get_or(j, "hull_reference", l.scales.hull_reference);
  l.scales.cost_rate_reference = get_or(j, "cost_rate_reference", l.scales.cost_rate_reference);
}

SyntheticNetworkSpec parse_synthetic(const json& j) {
  reject_unknown_keys(j, {"ports", "vessels", "seed", "min_distance_nm", "max_distance_nm", "area_nm", "neighbours", "prices"},
                      "synthetic_environment");
  SyntheticNetworkSpec s;
  s.ports = get_or(j, "ports", s.ports);
  s.vessels = get_or(j, "vessels", s.vessels);
  s.seed = get_or(j, "seed", s.seed);
  s.min_distance_nm = get_or(j, "min_distance_nm", s.min_distance_nm);
  s.max_distance_nm = get_or(j, "max_distance_nm", s.max_distance_nm);
  s.area_nm = get_or(j, "area_nm", s.area_nm);
  s.neighbours = get_or(j, "neighbours", s.neighbours);
  return s;
}

}  // namespace

RunConfig run_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown_keys(doc,
                      {"environment", "synthetic_environment", "episodes", "horizon", "seeds", "mode", "output",
                       "constraints", "fairness", "hierarchy", "learner"},
                      "run config");
  RunConfig rc;
  const bool has_env = doc.contains("environment");
  const bool has_synth = doc.contains("synthetic_environment");
  if (has_env == has_synth) throw InvalidConfig("give exactly one of environment or synthetic_environment");
  if (has_env) {
    const auto& e = doc["environment"];
    if (e.is_string()) {
      std::filesystem::path p = e.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      rc.environment = load_env_config(p);
    } else {
      rc.environment = env_config_from_json(e);
    }
  } else {
    const auto& sj = doc["synthetic_environment"];
    rc.environment = synthetic_env_config(parse_synthetic(sj));
    if (auto it = sj.find("prices"); it != sj.end()) {
      reject_unknown_keys(*it, {"fuel", "time", "wait"}, "prices");
      auto& p = rc.environment.prices;
      p.fuel = get_or(*it, "fuel", p.fuel);
      p.time = get_or(*it, "time", p.time);
      p.wait = get_or(*it, "wait", p.wait);
    }
  }
  rc.episodes = get_or(doc, "episodes", rc.episodes);
  rc.horizon = get_or(doc, "horizon", rc.horizon);
  rc.seeds = get_or(doc, "seeds", rc.seeds);
  rc.mode = parse_baseline_mode(get_or<std::string>(doc, "mode", "full"));
  rc.output = get_or<std::string>(doc, "output", rc.output.string());
  if (auto it = doc.find("constraints"); it != doc.end()) parse_constraints(*it, rc.constraints);
  if (auto it = doc.find("fairness"); it != doc.end()) parse_fairness(*it, rc);
  if (auto it = doc.find("hierarchy"); it != doc.end()) parse_hierarchy(*it, rc.hierarchy);
  if (auto it = doc.find("learner"); it != doc.end()) parse_learner(*it, rc.learner);
  validate(rc);
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
  return run_config_from_json(doc, path.parent_path());
}

void validate(const RunConfig& rc) {
  validate(rc.environment);
  if (rc.episodes < 1) throw InvalidConfig("episodes must be >= 1");
  if (rc.horizon < 1) throw InvalidConfig("horizon must be >= 1");
  if (rc.hierarchy.tau_h < 1 || rc.hierarchy.tau_h > rc.horizon) {
    throw InvalidConfig("tau_h must lie in [1, horizon]");
  }
  if (rc.seeds.empty()) throw InvalidConfig("seeds must not be empty");
  const auto& c = rc.constraints;
  if (c.budget_kg && !(*c.budget_kg > 0.0)) throw InvalidConfig("budget must be positive");
  if (!(c.cap_fraction > 0.0)) throw InvalidConfig("cap_fraction must be positive");
  if (c.calibration_episodes < 1) throw InvalidConfig("calibration_episodes must be >= 1");
  if (c.window && (*c.window < 1 || *c.window > rc.horizon)) throw InvalidConfig("window must lie in [1, horizon]");
  if (!(c.eta_base > 0.0)) throw InvalidConfig("eta_base must be positive");
  if (!(c.dual_cap > 0.0)) throw InvalidConfig("dual_cap must be positive");
  if (c.emission_unit_kg && !(*c.emission_unit_kg > 0.0)) throw InvalidConfig("emission_unit_kg must be positive");
  const auto& m = rc.hierarchy.macro;
  if (m.route_candidates < 1) throw InvalidConfig("route_candidates must be >= 1");
  if (m.window_offsets.empty()) throw InvalidConfig("window_offsets must not be empty");
  if (m.window_slack < 0) throw InvalidConfig("window_slack must be >= 0");
  if (!(rc.hierarchy.cap_adaptation.delta > 0.0 && rc.hierarchy.cap_adaptation.delta < 1.0)) {
    throw InvalidConfig("cap_delta must lie in (0, 1)");
  }
  const auto& l = rc.learner;
  if (!(l.temperature > 0.0)) throw InvalidConfig("temperature must be positive");
  if (!(l.discount > 0.0 && l.discount <= 1.0)) throw InvalidConfig("discount must lie in (0, 1]");
  if (!(l.learning_rate >= 0.0) || !(l.high_level_learning_rate >= 0.0)) {
    throw InvalidConfig("learning rates must be >= 0");
  }
  if (!(l.baseline_decay > 0.0 && l.baseline_decay <= 1.0)) throw InvalidConfig("baseline_decay must lie in (0, 1]");
  (void)FairnessState(rc.fairness);
}

double effective_beta_slope(const RunConfig& rc) {
  if (rc.fairness_slope_set) return rc.fairness.slope;
  const double steps = 0.6 * rc.episodes * rc.horizon;
  return rc.fairness.beta_max / steps;
}

}  // namespace ecofair
