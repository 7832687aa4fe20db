#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdnav/commands.hpp"
#include "crowdnav/config.hpp"
#include "crowdnav/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "config file (flat dotted keys, `key = value` lines)");
  cmd->add_option("--set", args.overrides,
                  "override one config key, e.g. --set shaping.mode=none");
  cmd->add_option("--out-dir", args.out_dir, "output directory");
}

// Builds the effective config: defaults, then file, then --set overrides.
// Throws ConfigError (exit code 2) on any problem.
crowdnav::RunConfig build_config(const CommonArgs& args) {
  crowdnav::RunConfig cfg;
  if (!args.config_path.empty()) {
    crowdnav::apply_config_file(cfg, args.config_path);
  }
  for (const auto& assignment : args.overrides) {
    crowdnav::apply_override(cfg, assignment);
  }
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdnav: deterministic crowd-navigation simulator and "
               "density-generalization benchmark"};
  app.require_subcommand(1);

  CommonArgs run_args, train_args, sweep_args, replay_args;

  CLI::App* run = app.add_subcommand("run", "run one episode, write its trace");
  add_common(run, run_args);
  std::string run_ego, run_out;
  int run_n = -1;
  long long run_seed = -1;
  run->add_option("--ego", run_ego, "orca | sfm | random | <checkpoint>");
  run->add_option("--n", run_n, "pedestrian count");
  run->add_option("--seed", run_seed, "episode seed");
  run->add_option("--out", run_out, "trace output path");

  CLI::App* train = app.add_subcommand("train", "train the policy");
  add_common(train, train_args);
  std::string resume_path;
  train->add_option("--resume", resume_path, "checkpoint to continue from");

  CLI::App* sweep = app.add_subcommand("sweep", "density-sweep evaluation");
  add_common(sweep, sweep_args);
  std::string sweep_ego = "orca";
  sweep->add_option("--ego", sweep_ego, "orca | sfm | random | <checkpoint>");

  CLI::App* replay = app.add_subcommand("replay", "verify a trace bit-exactly");
  add_common(replay, replay_args);
  std::string trace_path;
  replay->add_option("trace", trace_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      crowdnav::RunConfig cfg = build_config(run_args);
      if (!run_ego.empty()) cfg.run.ego = run_ego;
      if (run_n >= 0) cfg.run.n = run_n;
      if (run_seed >= 0) cfg.run.seed = static_cast<std::uint64_t>(run_seed);
      return crowdnav::run_command(crowdnav::cmd_run, cfg, run_out);
    }
    if (train->parsed()) {
      return crowdnav::run_command(crowdnav::cmd_train,
                                   build_config(train_args), resume_path);
    }
    if (sweep->parsed()) {
      return crowdnav::run_command(crowdnav::cmd_sweep,
                                   build_config(sweep_args), sweep_ego);
    }
    if (replay->parsed()) {
      return crowdnav::run_command(crowdnav::cmd_replay,
                                   build_config(replay_args), trace_path);
    }
  } catch (const crowdnav::ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 2;
}
