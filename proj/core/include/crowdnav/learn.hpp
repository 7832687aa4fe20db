#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crowdnav/encoder.hpp"
#include "crowdnav/mlp.hpp"
#include "crowdnav/shaping.hpp"
#include "crowdnav/sim.hpp"
#include "crowdnav/world.hpp"

namespace crowdnav {

// Parallel arrays over (env-major, step) transitions for one update.
struct RolloutBatch {
  int obs_dim = 0;
  std::vector<double> observations;  // size() * obs_dim, already normalized
  std::vector<Vec2> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return actions.size(); }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one trajectory segment:
//   delta_t = r_t + gamma * v_{t+1} * (1 - done_t) - v_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// with v_T = bootstrap_value, and returns_t = A_t + v_t.
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double bootstrap_value,
              double gamma, double lambda);

// In-place shift/scale to mean 0, std 1 (population std, 1e-8 floor).
void normalize_advantages(std::vector<double>& advantages);

struct PpoHypers {
  double clip_eps = 0.2;
  int epochs = 5;
  int minibatch_size = 256;
  double lr = 3e-4;
  double gae_lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

// Loss and gradients for one minibatch of `batch` rows given by `indices`,
// with externally normalized advantages. Gradients are averaged over the
// minibatch and accumulated into `grads` (zeroed first by the caller).
// Returns the scalar loss the gradients differentiate, which is what the
// finite-difference oracle checks.
double ppo_minibatch(const PolicyParams& params, const RolloutBatch& batch,
                     std::span<const std::size_t> indices,
                     std::span<const double> advantages,
                     const PpoHypers& hypers, PolicyGrads& grads,
                     UpdateStats* stats = nullptr);

// Clipped-surrogate update:
//   minimize -E[min(rho * A, clip(rho, 1 +- eps) * A)]
//            + value_coef * E[(v - return)^2] - entropy_coef * H
// over `epochs` passes of shuffled minibatches, with global gradient-norm
// clipping and Adam. Throws NonFiniteLoss if the loss or a gradient blows up.
UpdateStats ppo_update(PolicyParams& params, AdamState& adam,
                       const RolloutBatch& batch, const PpoHypers& hypers,
                       SplitMix64& rng);

struct TrainConfig {
  ArenaConfig arena;
  ScenarioConfig scenario;
  SimConfig sim;
  PedController controller = PedController::Sfm;
  ControllerParams controller_params;
  EncoderConfig encoder;
  ShapingConfig shaping;
  ExtrinsicConfig extrinsic;

  int n_min = 3;  // density randomization interval for training episodes
  int n_max = 5;

  long long total_steps = 200000;  // summed across environments
  int n_envs = 8;
  int rollout_len = 128;
  PpoHypers ppo;
  int hidden = 64;
  double init_log_std = -0.7;
  std::uint64_t seed = 1;
  long long checkpoint_interval = 50000;
  double normalizer_clip = 10.0;
  double normalizer_eps = 1e-8;
  int n_threads = 1;  // rollout workers; the result is identical for any value
};

struct TrainLogRow {
  long long step = 0;
  double mean_ext_return = 0.0;   // over the trailing episode window
  double safe_success_rate = 0.0; // over the trailing episode window
  double beta = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  long long episodes_done = 0;
};

struct TrainResult {
  PolicyParams params;
  RunningNormalizer normalizer;
  long long steps = 0;
  std::vector<TrainLogRow> log;
};

// Snapshot used to resume training from a checkpoint.
struct TrainSnapshot {
  PolicyParams params;
  RunningNormalizer normalizer;
  long long step = 0;
};

using LogSink = std::function<void(const TrainLogRow&)>;
using CheckpointSink =
    std::function<void(const PolicyParams&, const RunningNormalizer&, long long)>;

// Full training loop: encode / normalize / sample / step / shape, then the
// clipped-surrogate update, with the shaping weight annealed once per
// iteration and the potential re-initialized on every episode reset.
// Observation statistics are frozen at each iteration start and the per-env
// partial statistics merged exactly at the iteration barrier, so the result
// is bitwise identical for any worker count.
TrainResult train(const TrainConfig& cfg, const LogSink& on_log = {},
                  const CheckpointSink& on_checkpoint = {},
                  const TrainSnapshot* resume = nullptr);

}  // namespace crowdnav
