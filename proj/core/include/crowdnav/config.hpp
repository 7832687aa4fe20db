#pragma once

#include <string>
#include <vector>

#include "crowdnav/encoder.hpp"
#include "crowdnav/learn.hpp"
#include "crowdnav/shaping.hpp"
#include "crowdnav/sim.hpp"
#include "crowdnav/world.hpp"

namespace crowdnav {

// Complete run configuration. Every field has a documented default; the file
// format is flat dotted keys (`shaping.d_intimate = 0.45`), one per line,
// with `#` comments. Unknown keys are a hard error.
struct RunConfig {
  ArenaConfig arena;
  ScenarioConfig scenario;
  SimConfig sim;
  PedController controller = PedController::Sfm;
  ControllerParams controllers;
  EncoderConfig encoder;
  double normalizer_clip = 10.0;
  double normalizer_eps = 1e-8;
  ShapingConfig shaping;
  ExtrinsicConfig extrinsic;

  struct Train {
    int n_min = 3;
    int n_max = 5;
    long long total_steps = 200000;
    int n_envs = 8;
    int rollout_len = 128;
    PpoHypers ppo;
    int hidden = 64;
    double init_log_std = -0.7;
    std::uint64_t seed = 1;
    long long checkpoint_interval = 50000;
  } train;

  struct Sweep {
    std::vector<int> densities = {11, 13, 15, 17, 19, 21};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    int episodes_per_seed = 100;
  } sweep;

  struct Run {
    int n = 15;
    std::uint64_t seed = 7;
    std::string ego = "orca";  // orca | sfm | random | <checkpoint path>
  } run;

  std::string out_dir = "out";

  TrainConfig to_train_config(int n_threads) const;
};

struct ConfigEntry {
  std::string key;
  std::string doc;
  std::string (*getter)(const RunConfig&);
  void (*setter)(RunConfig&, const std::string&);
};

// Registry of every key, in serialization order.
const std::vector<ConfigEntry>& config_entries();

// Parses `key = value` lines into cfg. Throws ConfigError on unknown keys,
// bad values, or malformed lines.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::string& path);

// Applies one `key=value` override (the CLI --set flag).
void apply_override(RunConfig& cfg, const std::string& assignment);

// Canonical serialization: every key in registry order. Re-parsing yields an
// identical configuration, and the trace/checkpoint hash is computed over
// this exact text.
std::string serialize_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

// Serialization with a doc comment above each key (for humans).
std::string serialize_config_documented(const RunConfig& cfg);

}  // namespace crowdnav
