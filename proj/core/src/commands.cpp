#include "crowdnav/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "crowdnav/checkpoint.hpp"
#include "crowdnav/errors.hpp"
#include "crowdnav/evalbench.hpp"
#include "crowdnav/learn.hpp"
#include "crowdnav/numio.hpp"
#include "crowdnav/trace.hpp"

namespace crowdnav {

int worker_thread_count() {
  if (const char* env = std::getenv("CROWDNAV_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_command(int (*command)(const RunConfig&, const std::string&),
                const RunConfig& cfg, const std::string& arg) {
  try {
    return command(cfg, arg);
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}

namespace {

PolicyFactory make_policy_factory(const RunConfig& cfg,
                                  const std::string& ego_spec) {
  if (ego_spec == "orca") {
    return [cfg]() -> std::unique_ptr<EgoPolicy> {
      return std::make_unique<OrcaEgoPolicy>(cfg.controllers.orca, cfg.sim.dt);
    };
  }
  if (ego_spec == "sfm") {
    return [cfg]() -> std::unique_ptr<EgoPolicy> {
      return std::make_unique<SfmEgoPolicy>(cfg.controllers.sfm, cfg.sim.dt);
    };
  }
  if (ego_spec == "random") {
    return [cfg]() -> std::unique_ptr<EgoPolicy> {
      return std::make_unique<RandomEgoPolicy>(cfg.sim.v_max);
    };
  }
  // Anything else is a checkpoint path.
  if (!std::filesystem::exists(ego_spec)) {
    throw ConfigError("ego policy '" + ego_spec +
                      "' is not orca/sfm/random and no such checkpoint exists");
  }
  auto ckpt = std::make_shared<Checkpoint>(load_checkpoint(ego_spec));
  if (ckpt->params.obs_dim != cfg.encoder.observation_dim()) {
    throw ConfigError("checkpoint observation dim " +
                      std::to_string(ckpt->params.obs_dim) +
                      " does not match configured encoder (" +
                      std::to_string(cfg.encoder.observation_dim()) + ")");
  }
  const EncoderConfig encoder = cfg.encoder;
  return [ckpt, encoder]() -> std::unique_ptr<EgoPolicy> {
    return std::make_unique<LearnedEgoPolicy>(ckpt->params, ckpt->normalizer,
                                              encoder, "policy");
  };
}

std::string out_path_for(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

}  // namespace

int cmd_run(const RunConfig& cfg, const std::string& out_path) {
  const PolicyFactory factory = make_policy_factory(cfg, cfg.run.ego);
  const WorldState world0 =
      sample_episode(cfg.arena, cfg.run.n, cfg.run.n, cfg.run.seed,
                     cfg.controller, cfg.controllers, cfg.scenario);

  const std::unique_ptr<EgoPolicy> policy = factory();
  const EpisodeRecord record = run_episode(
      *policy, world0, cfg.arena, cfg.scenario, cfg.sim, /*keep_trace=*/true);

  const std::string path =
      out_path.empty() ? out_path_for(cfg, "trace.jsonl") : out_path;
  write_file_atomic(path, write_trace(cfg, world0, record));

  std::printf(
      "outcome=%s steps=%d collision_steps=%d freeze_fraction=%s "
      "final_goal_distance=%s trace=%s\n",
      outcome_name(record.outcome.kind), record.outcome.steps_taken,
      record.outcome.total_collision_steps,
      format_double(record.freeze_fraction).c_str(),
      format_double(record.final_goal_distance).c_str(), path.c_str());
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& resume_path) {
  const std::string config_text = serialize_config(cfg);
  const TrainConfig train_cfg = cfg.to_train_config(worker_thread_count());

  TrainSnapshot snapshot;
  const TrainSnapshot* resume = nullptr;
  if (!resume_path.empty()) {
    if (!std::filesystem::exists(resume_path)) {
      throw ConfigError("resume checkpoint '" + resume_path + "' not found");
    }
    Checkpoint ckpt = load_checkpoint(resume_path);
    if (ckpt.config_text != config_text) {
      throw ConfigError(
          "resume checkpoint was produced by a different configuration");
    }
    snapshot.params = std::move(ckpt.params);
    snapshot.normalizer = std::move(ckpt.normalizer);
    snapshot.step = ckpt.step;
    resume = &snapshot;
  }

  std::string log_csv =
      "step,mean_ext_return,safe_success_rate,beta,policy_loss,value_loss,"
      "entropy,episodes\n";
  const auto flush_log = [&]() {
    write_file_atomic(out_path_for(cfg, "train_log.csv"), log_csv);
  };

  const LogSink on_log = [&](const TrainLogRow& row) {
    log_csv += std::to_string(row.step) + ',' +
               format_double(row.mean_ext_return) + ',' +
               format_double(row.safe_success_rate) + ',' +
               format_double(row.beta) + ',' +
               format_double(row.policy_loss) + ',' +
               format_double(row.value_loss) + ',' +
               format_double(row.entropy) + ',' +
               std::to_string(row.episodes_done) + '\n';
  };

  const CheckpointSink on_checkpoint = [&](const PolicyParams& params,
                                           const RunningNormalizer& normalizer,
                                           long long step) {
    Checkpoint ckpt{params, normalizer, step, config_text};
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_%09lld.json", step);
    save_checkpoint(out_path_for(cfg, name), ckpt);
    save_checkpoint(out_path_for(cfg, "checkpoint_latest.json"), ckpt);
    flush_log();
  };

  const TrainResult result = train(train_cfg, on_log, on_checkpoint, resume);
  flush_log();

  const TrainLogRow& last =
      result.log.empty() ? TrainLogRow{} : result.log.back();
  std::printf(
      "trained steps=%lld episodes=%lld mean_ext_return=%s "
      "safe_success_rate=%s checkpoint=%s\n",
      result.steps, last.episodes_done,
      format_double(last.mean_ext_return).c_str(),
      format_double(last.safe_success_rate).c_str(),
      out_path_for(cfg, "checkpoint_latest.json").c_str());
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& ego_spec) {
  const PolicyFactory factory = make_policy_factory(cfg, ego_spec);
  const std::string method = factory()->id();

  SweepConfig sweep;
  sweep.densities = cfg.sweep.densities;
  sweep.seeds = cfg.sweep.seeds;
  sweep.episodes_per_seed = cfg.sweep.episodes_per_seed;

  const std::vector<EpisodeRecord> records = density_sweep(
      factory, sweep, cfg.arena, cfg.scenario, cfg.sim, cfg.controller,
      cfg.controllers, worker_thread_count());
  const MetricsSummary summary = compute_metrics(records);

  write_file_atomic(out_path_for(cfg, "sweep_" + method + "_raw.csv"),
                    write_raw_csv(records));
  write_file_atomic(out_path_for(cfg, "sweep_" + method + "_summary.csv"),
                    write_summary_csv(summary));

  for (const auto& row : summary.rows) {
    std::printf(
        "method=%s N=%d safe=%.3f±%.3f collisions/ep=%.2f freeze=%.3f "
        "timeout=%.3f episodes=%lld\n",
        row.method.c_str(), row.n, row.safe_success_mean, row.safe_success_std,
        row.collisions_per_episode_mean, row.freezing_rate_mean,
        row.timeout_mean, row.episodes);
  }
  return 0;
}

int cmd_replay(const RunConfig&, const std::string& trace_path) {
  if (!std::filesystem::exists(trace_path)) {
    throw ConfigError("trace file '" + trace_path + "' not found");
  }
  const TraceData trace = parse_trace(read_file(trace_path));
  const ReplayResult result = replay_trace(trace);
  if (result.ok) {
    std::printf("replay ok: %s\n", result.message.c_str());
    return 0;
  }
  std::printf("replay diverged at step %d: %s\n", result.divergence_step,
              result.message.c_str());
  return 1;
}

}  // namespace crowdnav
