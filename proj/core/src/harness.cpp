#include "ecofair/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <regex>
#include <thread>

#include "ecofair/csv.hpp"
#include "ecofair/error.hpp"

namespace ecofair {

const std::vector<std::string>& episode_columns() {
  static const std::vector<std::string> cols{
      "episode",       "seed",         "total_return", "emissions_total", "cap",    "violation_excess",
      "gini",          "minmax",       "throughput",   "waiting_hours",   "lambda_final", "beta_final",
      "max_mu",        "max_nu",       "cumulative_violation", "priced_return", "shaped_return"};
  return cols;
}

std::vector<double> episode_values(const EpisodeRecord& r) {
  return {static_cast<double>(r.episode), static_cast<double>(r.seed), r.total_return, r.emissions_total, r.cap,
          r.violation_excess, r.gini, r.minmax, static_cast<double>(r.throughput), r.waiting_hours, r.lambda_final,
          r.beta_final, r.max_mu, r.max_nu, r.cumulative_violation, r.priced_return, r.shaped_return};
}

void write_episode_header(std::ostream& out) { write_csv_row(out, episode_columns()); }

void write_episode_row(std::ostream& out, const EpisodeRecord& r) {
  std::vector<std::string> f;
  f.push_back(std::to_string(r.episode));
  f.push_back(std::to_string(r.seed));
  const auto v = episode_values(r);
  for (std::size_t i = 2; i < v.size(); ++i) {
    f.push_back(i == 8 ? std::to_string(r.throughput) : format_number(v[i]));
  }
  write_csv_row(out, f);
}

std::vector<EpisodeRecord> read_episode_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto& cols = episode_columns();
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(t.column(c));
  std::vector<EpisodeRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    auto num = [&](std::size_t k) {
      try {
        return std::stod(row[idx[k]]);
      } catch (const std::exception&) {
        throw Error(path.string() + ": bad number '" + row[idx[k]] + "'");
      }
    };
    EpisodeRecord r;
    r.episode = static_cast<int>(num(0));
    r.seed = static_cast<std::uint64_t>(std::stoull(row[idx[1]]));
    r.total_return = num(2);
    r.emissions_total = num(3);
    r.cap = num(4);
    r.violation_excess = num(5);
    r.gini = num(6);
    r.minmax = num(7);
    r.throughput = static_cast<int>(num(8));
    r.waiting_hours = num(9);
    r.lambda_final = num(10);
    r.beta_final = num(11);
    r.max_mu = num(12);
    r.max_nu = num(13);
    r.cumulative_violation = num(14);
    r.priced_return = num(15);
    r.shaped_return = num(16);
    out.push_back(r);
  }
  return out;
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::macro: return "macro";
    case Phase::micro: return "micro";
    case Phase::env_step: return "env_step";
    case Phase::dual_update: return "dual_update";
    case Phase::beta_update: return "beta_update";
    case Phase::shaping: return "shaping";
    case Phase::storage: return "storage";
    case Phase::learner_update: return "learner_update";
  }
  return "?";
}

namespace {

PolicySpec policy_spec(const LearnerSettings& l, std::size_t features, std::size_t actions, double lr) {
  PolicySpec s;
  s.features = features;
  s.actions = actions;
  s.temperature = l.temperature;
  s.learning_rate = lr;
  s.discount = l.discount;
  s.entropy_coef = l.entropy_coef;
  return s;
}

std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(episode));
}

}  // namespace

ExperimentRun::ExperimentRun(const RunConfig& config, std::uint64_t seed, double budget_kg)
    : config_(config), seed_(seed), flags_(configure_baseline(config.mode)), budget_kg_(budget_kg),
      low_baseline_(config.learner.baseline_decay), high_baseline_(config.learner.baseline_decay),
      policy_rng_(Rng(seed).split(1)) {
  validate(config_);
  if (!(budget_kg > 0.0)) throw InvalidConfig("emission cap must be positive");
  EnvOptions opts;
  opts.route_candidates = config_.hierarchy.macro.route_candidates;
  opts.window_slack = config_.hierarchy.macro.window_slack;
  env_ = std::make_shared<const Environment>(config_.environment, opts);
  clock_ = flags_.hierarchy ? MacroClock(config_.hierarchy.tau_h, config_.horizon)
                            : MacroClock(config_.horizon, config_.horizon);

  const auto& cs = config_.constraints;
  unit_kg_ = cs.emission_unit_kg.value_or(budget_kg_ / config_.horizon);
  ConstraintParams cp;
  cp.budget = budget_kg_ / unit_kg_;
  cp.horizon = config_.horizon;
  cp.window = cs.window;
  cp.eta_base = cs.eta_base;
  cp.dual_cap = cs.dual_cap;
  ledger_ = make_ledger(cp, env_->port_count());
  ledger_.frozen = !flags_.constraints;

  auto fp = config_.fairness;
  fp.slope = effective_beta_slope(config_);
  fairness_ = FairnessState(fp);
  if (!flags_.fairness) fairness_.freeze();

  const auto n = env_->vessel_count();
  const auto low_dim = flags_.centralised ? n * kMicroFeatureCount : kMicroFeatureCount;
  low_ = LinearSoftmaxPolicy(
      policy_spec(config_.learner, low_dim, kMicroActionCount, config_.learner.learning_rate));
  high_ = LinearSoftmaxPolicy(policy_spec(config_.learner, kMacroFeatureCount,
                                          config_.hierarchy.macro.action_count(),
                                          config_.learner.high_level_learning_rate));
}

EpisodeRecord ExperimentRun::run_episode(int episode) {
  const auto& env = *env_;
  const auto n = env.vessel_count();
  const auto& settings = config_.hierarchy.macro;
  const auto& scales = config_.learner.scales;
  const double unit = unit_kg_;
  FeatureScales fs = scales;
  fs.tau_h = clock_.tau_h;

  FleetState s = env.reset(episode_seed(seed_, episode));
  std::vector<Trajectory> low_traj(n, Trajectory(low_.spec().features, kMicroActionCount));
  std::vector<Trajectory> high_traj(n, Trajectory(kMacroFeatureCount, settings.action_count()));
  std::vector<std::size_t> high_index(n, 0);
  std::vector<MicroAction> actions(n);
  std::vector<std::size_t> low_index(n, 0);
  std::vector<std::vector<double>> feats(n);
  std::vector<std::vector<std::uint8_t>> masks(n);
  MacroAction macro;
  macro_decisions_ = 0;

  EpisodeRecord rec;
  rec.episode = episode;
  rec.seed = seed_;
  rec.cap = budget_kg_;

  for (int t = 0; t < config_.horizon; ++t) {
    if (clock_.boundary(t)) {
      phase(Phase::macro, t);
      const auto legs = vessel_legs(env, s);
      const auto ctx = summarize(env, s, clock_, budget_kg_, phi(s.cumulative_cost, fairness_.params().kind));
      if (flags_.hierarchy) {
        auto dec = macro_decide(high_, ctx, legs, clock_, settings, policy_rng_);
        for (std::size_t i = 0; i < n; ++i) {
          const auto& smp = dec.samples[i];
          high_index[i] = high_traj[i].push(smp.features, smp.action, smp.mask);
        }
        macro = std::move(dec.action);
      } else {
        macro = default_macro(legs, ctx, clock_, settings);
      }
      ++macro_decisions_;
      if (macro_log_) {
        for (std::size_t i = 0; i < n; ++i) {
          const auto& d = macro.directives[i];
          macro_log_->push_back({episode, macro.epoch, t, static_cast<VesselId>(i), d.route_id, d.window_start,
                                 d.window_end, d.envelope});
        }
      }
    }

    phase(Phase::micro, t);
    if (flags_.centralised) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto obs = env.observe(s, static_cast<VesselId>(i), macro);
        feats[i] = featurize(obs, fs);
        masks[i] = micro_action_mask(obs);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = centralised_features(feats, i);
        const auto a = low_.act(x, policy_rng_, masks[i]);
        actions[i] = decode_micro_action(a.action);
        low_index[i] = low_traj[i].push(x, a.action, masks[i]);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto obs = env.observe(s, static_cast<VesselId>(i), macro);
        const auto d = micro_decide(low_, obs, fs, policy_rng_);
        actions[i] = d.action;
        low_index[i] = low_traj[i].push(d.features, d.index, d.mask);
      }
    }

    phase(Phase::env_step, t);
    const auto res = env.step(s, actions, macro);
    const auto& m = res.metrics;

    phase(Phase::dual_update, t);
    const double e = m.emissions / unit;
    const auto dual_t = ledger_.steps;
    update_dual_capacity(ledger_, m.berth_overflow, m.crane_overflow, dual_t);
    update_dual_emission(ledger_, e, dual_t);

    phase(Phase::beta_update, t);
    const double phi_now = fairness_.update(s.cumulative_cost);
    const double beta = fairness_.beta();

    phase(Phase::shaping, t);
    std::vector<double> shaped(n);
    for (std::size_t i = 0; i < n; ++i) {
      shaped[i] = price_reward(res.rewards[i], ledger_, e, m.berth_overflow, m.crane_overflow);
      rec.total_return += res.rewards[i];
      rec.priced_return += shaped[i];
    }
    apply_fairness_penalty(shaped, beta, phi_now);

    phase(Phase::storage, t);
    for (std::size_t i = 0; i < n; ++i) {
      rec.shaped_return += shaped[i];
      low_traj[i].set_reward(low_index[i], shaped[i]);
      if (flags_.hierarchy) high_traj[i].add_reward(high_index[i], shaped[i]);
    }
    if (observer_) observer_(s, m);
  }

  phase(Phase::learner_update, config_.horizon);
  UpdateOptions opts;
  opts.scale = config_.learner.average_over_agents ? 1.0 / static_cast<double>(n) : 1.0;
  opts.normalize_advantages = config_.learner.normalize_advantages;
  low_stats_ = update(low_, low_traj, low_baseline_, opts);
  if (flags_.hierarchy) update(high_, high_traj, high_baseline_, opts);

  rec.emissions_total = s.cumulative_emissions;
  const double ledger_kg = ledger_.episode_emissions * unit;
  if (std::abs(ledger_kg - rec.emissions_total) > 1e-9 * std::max(1.0, rec.emissions_total)) {
    throw InvariantViolation("ledger emissions disagree with the environment");
  }
  if (s.capacity_violations != 0) throw InvariantViolation("post-resolution capacity exceeded");
  rec.violation_excess = std::max(0.0, rec.emissions_total - budget_kg_);
  rec.gini = gini(s.cumulative_cost);
  rec.minmax = minmax(s.cumulative_cost);
  rec.throughput = s.throughput;
  rec.waiting_hours = s.total_waiting_hours;
  rec.lambda_final = ledger_.lambda;
  rec.beta_final = fairness_.beta();
  rec.max_mu = ledger_.max_mu();
  rec.max_nu = ledger_.max_nu();
  rec.cumulative_violation =
      std::accumulate(ledger_.violation_history.begin(), ledger_.violation_history.end(), 0.0);
  reset_episode(ledger_, config_.constraints.persistence);

  if (config_.hierarchy.cap_adaptation.enabled) {
    budget_kg_ = adapt_cap(budget_kg_, rec.gini, config_.fairness.zeta, rec.violation_excess == 0.0,
                           config_.hierarchy.cap_adaptation);
    ledger_.budget = budget_kg_ / unit;
    ledger_.window_budget = ledger_.budget * ledger_.window_length / static_cast<double>(config_.horizon);
  }
  return rec;
}

std::vector<EpisodeRecord> ExperimentRun::run(int episodes) {
  std::vector<EpisodeRecord> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) out.push_back(run_episode(e));
  return out;
}

double calibrate_budget(const RunConfig& config) {
  RunConfig probe = config;
  probe.mode = BaselineMode::no_constraints;
  probe.hierarchy.cap_adaptation.enabled = false;
  const Environment env(probe.environment);
  // Placeholder cap: the per-step bound over the whole horizon. Duals stay frozen.
  ExperimentRun run(probe, config.seeds.front(), env.emission_bound() * probe.horizon);
  const int window = probe.constraints.calibration_episodes;
  const int length = probe.constraints.calibrate_trained ? std::max(window, probe.episodes) : window;
  double total = 0.0;
  for (int e = 0; e < length; ++e) {
    const double emitted = run.run_episode(e).emissions_total;
    if (e >= length - window) total += emitted;
  }
  const double mean = total / window;
  const double b = probe.constraints.cap_fraction * mean;
  if (!(b > 0.0)) throw InvalidConfig("calibrated cap is not positive");
  return b;
}

std::vector<AggregateRow> aggregate(std::span<const std::vector<EpisodeRecord>> per_seed) {
  if (per_seed.empty()) throw RaggedInput("no seeds to aggregate");
  const auto episodes = per_seed.front().size();
  if (episodes == 0) throw RaggedInput("seed with no episodes");
  for (const auto& s : per_seed) {
    if (s.size() != episodes) throw RaggedInput("seeds have different episode counts");
  }
  const auto& cols = episode_columns();
  const double k = static_cast<double>(per_seed.size());
  std::vector<AggregateRow> rows;
  for (std::size_t c = 2; c < cols.size(); ++c) {
    std::vector<double> means;
    std::vector<double> finals;
    for (const auto& s : per_seed) {
      double sum = 0.0;
      for (const auto& r : s) sum += episode_values(r)[c];
      means.push_back(sum / static_cast<double>(episodes));
      finals.push_back(episode_values(s.back())[c]);
    }
    auto stats = [k](const std::vector<double>& v) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / k;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::pair{mean, std::sqrt(ss / k)};
    };
    const auto [mm, ms] = stats(means);
    const auto [fm, fsd] = stats(finals);
    rows.push_back({cols[c], mm, ms, fm, fsd});
  }
  return rows;
}

void write_aggregate_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv_row(out, {"metric", "mean_over_episodes_mean", "mean_over_episodes_std", "final_episode_mean",
                      "final_episode_std"});
  for (const auto& r : rows) {
    write_csv_row(out, {r.metric, format_number(r.mean_over_episodes_mean), format_number(r.mean_over_episodes_std),
                        format_number(r.final_episode_mean), format_number(r.final_episode_std)});
  }
}

void write_plot_data(const std::filesystem::path& path, std::span<const std::vector<EpisodeRecord>> per_seed) {
  if (per_seed.empty()) throw RaggedInput("no seeds");
  const auto episodes = per_seed.front().size();
  for (const auto& s : per_seed) {
    if (s.size() != episodes) throw RaggedInput("seeds have different episode counts");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const auto& cols = episode_columns();
  std::vector<std::string> header{"episode"};
  header.insert(header.end(), cols.begin() + 2, cols.end());
  write_csv_row(out, header);
  for (std::size_t e = 0; e < episodes; ++e) {
    std::vector<double> sum(cols.size(), 0.0);
    for (const auto& s : per_seed) {
      const auto v = episode_values(s[e]);
      for (std::size_t c = 0; c < v.size(); ++c) sum[c] += v[c];
    }
    std::vector<std::string> row{std::to_string(per_seed.front()[e].episode)};
    for (std::size_t c = 2; c < cols.size(); ++c) {
      row.push_back(format_number(sum[c] / static_cast<double>(per_seed.size())));
    }
    write_csv_row(out, row);
  }
}

std::vector<std::vector<EpisodeRecord>> read_seed_csvs(const std::filesystem::path& dir) {
  static const std::regex pattern(R"(episodes_seed(\d+)\.csv)");
  std::map<std::uint64_t, std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const auto name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files[std::stoull(m[1].str())] = entry.path();
  }
  if (files.empty()) throw Error("no episodes_seed<S>.csv files in " + dir.string());
  std::vector<std::vector<EpisodeRecord>> out;
  for (const auto& [seed, path] : files) out.push_back(read_episode_csv(path));
  return out;
}

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* v = std::getenv("ECOFAIR_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && parsed >= 1) n = static_cast<unsigned>(parsed);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

namespace {

void write_macro_log(std::ostream& out, const std::vector<MacroLogEntry>& log) {
  for (const auto& m : log) {
    write_csv_row(out, {std::to_string(m.episode), std::to_string(m.epoch), std::to_string(m.t),
                        std::to_string(m.vessel), std::to_string(m.route_id), std::to_string(m.window_start),
                        std::to_string(m.window_end), format_number(m.envelope)});
  }
}

std::vector<EpisodeRecord> run_seed(const RunConfig& config, std::uint64_t seed, double budget) {
  ExperimentRun run(config, seed, budget);
  const bool files = !config.output.empty();
  std::ofstream episodes_out;
  std::ofstream macro_out;
  if (files) {
    const auto stem = "seed" + std::to_string(seed) + ".csv";
    episodes_out.open(config.output / ("episodes_" + stem));
    macro_out.open(config.output / ("macro_" + stem));
    if (!episodes_out || !macro_out) throw Error("cannot write to " + config.output.string());
    write_episode_header(episodes_out);
    write_csv_row(macro_out, {"episode", "epoch", "t", "vessel", "route_id", "window_start", "window_end", "envelope"});
  }
  std::vector<MacroLogEntry> log;
  if (files) run.set_macro_log(&log);
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(config.episodes));
  for (int e = 0; e < config.episodes; ++e) {
    records.push_back(run.run_episode(e));
    if (files) {
      write_episode_row(episodes_out, records.back());
      write_macro_log(macro_out, log);
      log.clear();
      // Keep completed episodes on disk if a later one aborts.
      episodes_out.flush();
    }
  }
  return records;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  validate(config);
  if (!config.output.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.output, ec);
    if (ec || !std::filesystem::is_directory(config.output)) {
      throw Error("unwritable output directory " + config.output.string());
    }
  }
  ExperimentResult result;
  result.budget_kg = config.constraints.budget_kg ? *config.constraints.budget_kg : calibrate_budget(config);
  result.per_seed.resize(config.seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      try {
        result.per_seed[i] = run_seed(config, config.seeds[i], result.budget_kg);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto workers = worker_count(config.seeds.size());
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  result.aggregate = aggregate(result.per_seed);
  if (!config.output.empty()) write_aggregate_csv(config.output / "aggregate.csv", result.aggregate);
  return result;
}

ScalingReport scaling_probe(const RunConfig& config, std::span<const int> agents, int episodes) {
  if (!std::is_sorted(agents.begin(), agents.end())) throw InvalidConfig("agent counts must be ascending");
  if (episodes < 1) throw InvalidConfig("episodes must be >= 1");
  ScalingReport report;
  const int ports = static_cast<int>(config.environment.ports.size());
  for (int n : agents) {
    if (n < 1) throw InvalidConfig("agent counts must be >= 1");
    RunConfig rc = config;
    rc.environment.vessels = synthetic_fleet(n, ports, 0x5ca1e);
    rc.environment.emission_bound.reset();
    rc.output.clear();
    const Environment env(rc.environment);
    ExperimentRun run(rc, rc.seeds.front(), env.emission_bound() * rc.horizon);
    run.run_episode(0);  // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (int e = 1; e <= episodes; ++e) run.run_episode(e);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    report.points.push_back({n, dt.count() / episodes});
  }
  if (report.points.size() >= 2) {
    double mx = 0.0, my = 0.0;
    const double k = static_cast<double>(report.points.size());
    for (const auto& p : report.points) {
      mx += std::log(p.agents);
      my += std::log(p.seconds_per_episode);
    }
    mx /= k;
    my /= k;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : report.points) {
      sxy += (std::log(p.agents) - mx) * (std::log(p.seconds_per_episode) - my);
      sxx += (std::log(p.agents) - mx) * (std::log(p.agents) - mx);
    }
    report.exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return report;
}

}  // namespace ecofair
