#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "crowdnav/checkpoint.hpp"
#include "crowdnav/commands.hpp"
#include "crowdnav/config.hpp"
#include "crowdnav/errors.hpp"
#include "crowdnav/numio.hpp"
#include "crowdnav/trace.hpp"

using namespace crowdnav;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("crowdnav_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config round-trips through its own serialization") {
  RunConfig cfg;
  cfg.shaping.d_intimate = 0.5;
  cfg.encoder.occupancy_radii = {0.4, 0.9, 1.7, 2.4};
  cfg.sweep.seeds = {10, 20};
  cfg.run.ego = "sfm";
  const std::string text = serialize_config(cfg);

  RunConfig reparsed;
  apply_config_text(reparsed, text);
  CHECK(serialize_config(reparsed) == text);
  CHECK(config_hash(reparsed) == config_hash(cfg));
}

TEST_CASE("unknown keys and malformed lines are hard errors") {
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(apply_config_text(cfg, "shaping.d_intimat = 0.45\n"),
                       doctest::Contains("shaping.d_intimat"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "just some words\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "sim.dt = not_a_number\n"),
                  ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "peds.controller=teleport"), ConfigError);
}

TEST_CASE("comments and overrides are applied in order") {
  RunConfig cfg;
  apply_config_text(cfg,
                    "# comment line\n"
                    "sim.dt = 0.05  # trailing comment\n"
                    "\n"
                    "shaping.mode = none\n");
  CHECK(cfg.sim.dt == 0.05);
  CHECK(cfg.shaping.mode == ShapingMode::None);
  apply_override(cfg, "shaping.mode=pss_only");
  CHECK(cfg.shaping.mode == ShapingMode::PssOnly);
}

TEST_CASE("documented dump covers every registry key") {
  RunConfig cfg;
  const std::string doc = serialize_config_documented(cfg);
  for (const auto& entry : config_entries()) {
    CHECK(doc.find(entry.key + " = ") != std::string::npos);
  }
  // The documented form parses back to the same config.
  RunConfig reparsed;
  apply_config_text(reparsed, doc);
  CHECK(serialize_config(reparsed) == serialize_config(cfg));
}

TEST_CASE("number formatting round-trips exactly") {
  SplitMix64 rng(60);
  for (int trial = 0; trial < 2000; ++trial) {
    double value = rng.uniform(-1e6, 1e6);
    if (trial % 7 == 0) value = rng.uniform(-1e-4, 1e-4);
    if (trial % 11 == 0) value = -0.0;
    CHECK(parse_double(format_double(value)) == value);
    const std::string json_num = format_json_number(value);
    CHECK(parse_double(json_num) == value);
  }
}

TEST_CASE("trace writes, parses, and replays bit-exactly") {
  RunConfig cfg;
  cfg.run.n = 6;
  cfg.run.seed = 17;
  const WorldState world0 =
      sample_episode(cfg.arena, 6, 6, 17, cfg.controller, cfg.controllers,
                     cfg.scenario);
  OrcaEgoPolicy policy(cfg.controllers.orca, cfg.sim.dt);
  const EpisodeRecord record = run_episode(policy, world0, cfg.arena,
                                           cfg.scenario, cfg.sim, true);
  const std::string text = write_trace(cfg, world0, record);
  const TraceData trace = parse_trace(text);
  CHECK(trace.n == 6);
  CHECK(trace.episode_seed == 17);
  CHECK(trace.steps.size() == static_cast<std::size_t>(record.outcome.steps_taken));

  const ReplayResult ok = replay_trace(trace);
  CHECK(ok.ok);

  SUBCASE("a tampered state is caught at its step") {
    TraceData bad = trace;
    const std::size_t k = bad.steps.size() / 2;
    bad.steps[k].ego[0] += 1e-12;
    const ReplayResult result = replay_trace(bad);
    CHECK(!result.ok);
    CHECK(result.divergence_step == bad.steps[k].t);
  }

  SUBCASE("a tampered action diverges the recomputation") {
    TraceData bad = trace;
    bad.steps[0].action.x += 1e-9;
    const ReplayResult result = replay_trace(bad);
    CHECK(!result.ok);
  }

  SUBCASE("unsupported versions are rejected") {
    const std::string bumped =
        text.substr(0, text.find("\"version\":1")) + "\"version\":9" +
        text.substr(text.find("\"version\":1") + 11);
    CHECK_THROWS_AS(parse_trace(bumped), TraceError);
  }
}

TEST_CASE("checkpoints round-trip bitwise") {
  SplitMix64 rng(61);
  PolicyParams params = PolicyParams::init(10, 6, -0.7, rng);
  RunningNormalizer norm(10, 10.0, 1e-8);
  for (int i = 0; i < 7; ++i) {
    std::vector<double> row(10);
    for (auto& v : row) v = rng.uniform(-3.0, 3.0);
    norm.update(row);
  }
  RunConfig cfg;
  const Checkpoint saved{params, norm, 12345, serialize_config(cfg)};
  const Checkpoint loaded = parse_checkpoint_text(write_checkpoint_text(saved));
  CHECK(loaded.step == 12345);
  CHECK(loaded.config_text == saved.config_text);
  CHECK(loaded.params.w1 == params.w1);
  CHECK(loaded.params.w_mu == params.w_mu);
  CHECK(loaded.params.log_std == params.log_std);
  CHECK(loaded.normalizer.mean() == norm.mean());
  CHECK(loaded.normalizer.m2() == norm.m2());
  CHECK(loaded.normalizer.count() == norm.count());
}

TEST_CASE("cmd_run writes a verifiable trace and is byte-deterministic") {
  const fs::path dir = temp_dir("run");
  RunConfig cfg;
  cfg.out_dir = dir.string();
  cfg.run.ego = "orca";
  cfg.run.n = 8;
  cfg.run.seed = 3;

  CHECK(cmd_run(cfg, (dir / "a.jsonl").string()) == 0);
  CHECK(cmd_run(cfg, (dir / "b.jsonl").string()) == 0);
  CHECK(read_file((dir / "a.jsonl").string()) ==
        read_file((dir / "b.jsonl").string()));
  CHECK(cmd_replay(cfg, (dir / "a.jsonl").string()) == 0);

  SUBCASE("run_command maps ConfigError to exit code 2") {
    RunConfig bad = cfg;
    bad.run.ego = "no_such_checkpoint.json";
    CHECK(run_command(cmd_run, bad, "") == 2);
  }

  SUBCASE("a corrupted trace byte fails replay with exit 1") {
    std::string text = read_file((dir / "a.jsonl").string());
    const auto pos = text.rfind("\"ego\":[");
    REQUIRE(pos != std::string::npos);
    // Flip one digit inside the recorded state.
    for (std::size_t i = pos + 8; i < text.size(); ++i) {
      if (text[i] >= '1' && text[i] <= '8') {
        text[i] = static_cast<char>(text[i] + 1);
        break;
      }
    }
    write_file_atomic((dir / "tampered.jsonl").string(), text);
    CHECK(run_command(cmd_replay, cfg, (dir / "tampered.jsonl").string()) == 1);
  }
}

TEST_CASE("cmd_train writes checkpoints and a parseable log") {
  const fs::path dir = temp_dir("train");
  RunConfig cfg;
  cfg.out_dir = dir.string();
  cfg.train.total_steps = 4096;
  cfg.train.n_envs = 2;
  cfg.train.rollout_len = 64;
  cfg.train.ppo.minibatch_size = 64;
  cfg.train.hidden = 16;
  cfg.train.n_min = 2;
  cfg.train.n_max = 3;
  cfg.train.checkpoint_interval = 2048;

  CHECK(cmd_train(cfg, "") == 0);
  CHECK(fs::exists(dir / "checkpoint_latest.json"));
  CHECK(fs::exists(dir / "train_log.csv"));
  const Checkpoint ckpt = load_checkpoint((dir / "checkpoint_latest.json").string());
  CHECK(ckpt.step >= cfg.train.total_steps);
  CHECK(ckpt.config_text == serialize_config(cfg));

  SUBCASE("resume requires a matching config snapshot") {
    RunConfig other = cfg;
    other.shaping.d_intimate = 0.31;
    CHECK_THROWS_AS(
        cmd_train(other, (dir / "checkpoint_latest.json").string()),
        ConfigError);
  }

  SUBCASE("resume continues the counter and the sweep accepts the checkpoint") {
    // Resume the same configuration from the mid-run snapshot; training picks
    // up at the recorded step and finishes the remaining budget.
    REQUIRE(fs::exists(dir / "checkpoint_000002048.json"));
    CHECK(cmd_train(cfg, (dir / "checkpoint_000002048.json").string()) == 0);
    const Checkpoint resumed =
        load_checkpoint((dir / "checkpoint_latest.json").string());
    CHECK(resumed.step >= cfg.train.total_steps);

    RunConfig sweep_cfg = cfg;
    sweep_cfg.sweep.densities = {3};
    sweep_cfg.sweep.seeds = {1};
    sweep_cfg.sweep.episodes_per_seed = 2;
    CHECK(cmd_sweep(sweep_cfg, (dir / "checkpoint_latest.json").string()) == 0);
    CHECK(fs::exists(dir / "sweep_policy_raw.csv"));
  }
}

TEST_CASE("cmd_sweep rejects a missing checkpoint with exit 2") {
  const fs::path dir = temp_dir("sweep");
  RunConfig cfg;
  cfg.out_dir = dir.string();
  CHECK(run_command(cmd_sweep, cfg, (dir / "missing.json").string()) == 2);
}

TEST_CASE("cmd_sweep writes raw and summary CSVs") {
  const fs::path dir = temp_dir("sweep2");
  RunConfig cfg;
  cfg.out_dir = dir.string();
  cfg.sweep.densities = {5};
  cfg.sweep.seeds = {1};
  cfg.sweep.episodes_per_seed = 3;
  CHECK(cmd_sweep(cfg, "random") == 0);
  const std::string raw = read_file((dir / "sweep_random_raw.csv").string());
  CHECK(raw.find("method,N,seed,episode,outcome") == 0);
  CHECK(parse_raw_csv(raw).size() == 3);
  const std::string summary =
      read_file((dir / "sweep_random_summary.csv").string());
  CHECK(summary.find("method,N,safe_success_mean") == 0);
}

TEST_SUITE_END();
