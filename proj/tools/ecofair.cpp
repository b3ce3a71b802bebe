// Command-line front end: training runs, regret checks, aggregation,
// scaling probes and plot data.
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecofair/csv.hpp"
#include "ecofair/error.hpp"
#include "ecofair/harness.hpp"
#include "ecofair/regret.hpp"
#include "ecofair/run_config.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ecofair::InvalidConfig("bad agent count '" + item + "'");
    }
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seeds, const std::string& mode,
            const std::string& out, int episodes) {
  auto rc = ecofair::load_run_config(config_path);
  if (!seeds.empty()) rc.seeds = seeds;
  if (!mode.empty()) rc.mode = ecofair::parse_baseline_mode(mode);
  if (!out.empty()) rc.output = out;
  if (episodes > 0) rc.episodes = episodes;
  ecofair::validate(rc);
  const auto result = ecofair::run_experiment(rc);
  std::printf("mode %s, cap %s kg, %zu seed(s) x %d episodes -> %s\n", ecofair::to_string(rc.mode),
              ecofair::format_number(result.budget_kg).c_str(), rc.seeds.size(), rc.episodes, rc.output.c_str());
  for (const auto& row : result.aggregate) {
    std::printf("  %-22s %12s +- %-12s final %12s +- %s\n", row.metric.c_str(),
                ecofair::format_number(row.mean_over_episodes_mean).c_str(),
                ecofair::format_number(row.mean_over_episodes_std).c_str(),
                ecofair::format_number(row.final_episode_mean).c_str(),
                ecofair::format_number(row.final_episode_std).c_str());
  }
  return 0;
}

int cmd_verify(const std::string& kind, std::int64_t steps) {
  const auto report = ecofair::verify_regret(ecofair::parse_regret_kind(kind), steps);
  if (report.fit.applicable) {
    std::printf("%s: slope %.4f over %zu points (threshold %.2f), total %.6g\n", kind.c_str(), report.fit.slope,
                report.fit.points, report.threshold, report.total);
  } else {
    std::printf("%s: slope n/a (no violations)\n", kind.c_str());
  }
  if (report.kind == ecofair::RegretKind::emissions) {
    std::printf("  tail mean %.6g vs allowance %.6g, final lambda %.6g, per-step hinge slope %.4f\n",
                report.tail_mean, report.allowance, report.final_price, report.per_step_hinge.slope);
  } else {
    std::printf("  final beta %.6g\n", report.final_price);
  }
  std::printf("%s\n", report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 1;
}

int cmd_aggregate(const std::string& dir) {
  const auto per_seed = ecofair::read_seed_csvs(dir);
  const auto rows = ecofair::aggregate(per_seed);
  const std::filesystem::path out = std::filesystem::path(dir) / "aggregate.csv";
  ecofair::write_aggregate_csv(out, rows);
  std::printf("%zu seed(s) -> %s\n", per_seed.size(), out.c_str());
  return 0;
}

int cmd_scale(const std::string& config_path, const std::string& agents, int episodes) {
  auto rc = ecofair::load_run_config(config_path);
  const auto counts = parse_int_list(agents);
  const auto report = ecofair::scaling_probe(rc, counts, episodes);
  std::printf("agents,seconds_per_episode\n");
  for (const auto& p : report.points) std::printf("%d,%.6g\n", p.agents, p.seconds_per_episode);
  std::printf("exponent %.4f\n", report.exponent);
  return 0;
}

int cmd_plot(const std::string& dir) {
  const auto per_seed = ecofair::read_seed_csvs(dir);
  const std::filesystem::path out = std::filesystem::path(dir) / "plot_data.csv";
  ecofair::write_plot_data(out, per_seed);
  std::printf("%s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ecofair: constrained, fairness-priced hierarchical fleet control"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string mode;
  std::string out;
  int episodes = 0;
  auto* run = app.add_subcommand("run", "train over every seed and write CSVs");
  run->add_option("--config", config_path, "run config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seeds, "seed (repeatable); overrides the config");
  run->add_option("--mode", mode, "full|no-constraints|no-fairness|flat-decentralised|centralised|hier-only");
  run->add_option("--out", out, "output directory");
  run->add_option("--episodes", episodes, "override the episode count");

  std::string kind = "emissions";
  std::int64_t steps = 100000;
  auto* verify = app.add_subcommand("verify-regret", "log-log slope of cumulative violation on a fixture");
  verify->add_option("--kind", kind, "emissions|fairness")->check(CLI::IsMember({"emissions", "fairness"}));
  verify->add_option("--steps", steps, "fixture length (>= 10000)");

  std::string in_dir;
  auto* agg = app.add_subcommand("aggregate", "recompute aggregate.csv from per-seed CSVs");
  agg->add_option("--in", in_dir, "run output directory")->required()->check(CLI::ExistingDirectory);

  std::string agents = "10,20,40,80";
  int probe_episodes = 4;
  auto* scale = app.add_subcommand("scale-probe", "wall clock per episode versus fleet size");
  scale->add_option("--config", config_path, "run config JSON")->required()->check(CLI::ExistingFile);
  scale->add_option("--agents", agents, "comma-separated ascending fleet sizes");
  scale->add_option("--episodes", probe_episodes, "timed episodes per size");

  auto* plot = app.add_subcommand("plot-data", "per-episode series (seed means) with the cap column");
  plot->add_option("--in", in_dir, "run output directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seeds, mode, out, episodes);
    if (*verify) return cmd_verify(kind, steps);
    if (*agg) return cmd_aggregate(in_dir);
    if (*scale) return cmd_scale(config_path, agents, probe_episodes);
    if (*plot) return cmd_plot(in_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
