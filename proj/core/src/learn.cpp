#include "crowdnav/learn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

#include "crowdnav/errors.hpp"

namespace crowdnav {

GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double bootstrap_value,
              double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw DimensionMismatch("gae: misaligned arrays");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);

  double next_advantage = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * not_done - values[i];
    next_advantage = delta + gamma * lambda * not_done * next_advantage;
    out.advantages[i] = next_advantage;
    out.returns[i] = next_advantage + values[i];
    next_value = values[i];
  }
  return out;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  double mean = 0.0;
  for (const double a : advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (const double a : advantages) var += (a - mean) * (a - mean);
  var /= n;
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * inv_std;
}

double ppo_minibatch(const PolicyParams& params, const RolloutBatch& batch,
                     std::span<const std::size_t> indices,
                     std::span<const double> advantages,
                     const PpoHypers& hypers, PolicyGrads& grads,
                     UpdateStats* stats) {
  const double inv_m = 1.0 / static_cast<double>(indices.size());
  ForwardCache cache;
  double policy_loss = 0.0;
  double value_loss = 0.0;

  for (const std::size_t idx : indices) {
    const std::span<const double> obs(
        batch.observations.data() + idx * static_cast<std::size_t>(batch.obs_dim),
        static_cast<std::size_t>(batch.obs_dim));
    const PolicyOutput out = policy_forward_cached(params, obs, cache);

    const Vec2 action = batch.actions[idx];
    const double advantage = advantages[idx];
    const double log_prob_new =
        gaussian_log_prob(action, out.mean, params.log_std);
    const double ratio = std::exp(log_prob_new - batch.log_probs[idx]);
    const double surr1 = ratio * advantage;
    const double surr2 =
        std::clamp(ratio, 1.0 - hypers.clip_eps, 1.0 + hypers.clip_eps) *
        advantage;
    policy_loss += -std::min(surr1, surr2);

    // d(-min)/d(log_prob_new): active when the unclipped branch is the
    // minimum, or when the clipped branch is the minimum but not saturated
    // (where the two branches coincide locally).
    double d_logp = 0.0;
    if (surr1 <= surr2) {
      d_logp = -advantage * ratio;
    } else if (ratio > 1.0 - hypers.clip_eps && ratio < 1.0 + hypers.clip_eps) {
      d_logp = -advantage * ratio;
    }

    const double sx = std::exp(params.log_std[0]);
    const double sy = std::exp(params.log_std[1]);
    const double zx = (action.x - out.mean.x) / sx;
    const double zy = (action.y - out.mean.y) / sy;

    // d log_prob / d mean = z / sigma; d log_prob / d log_std = z^2 - 1.
    const std::array<double, 2> d_mean = {d_logp * inv_m * (zx / sx),
                                          d_logp * inv_m * (zy / sy)};
    grads.log_std[0] += d_logp * inv_m * (zx * zx - 1.0);
    grads.log_std[1] += d_logp * inv_m * (zy * zy - 1.0);

    const double verr = out.value - batch.returns[idx];
    value_loss += verr * verr;
    const double d_value = hypers.value_coef * 2.0 * verr * inv_m;

    policy_backward(params, cache, obs, d_mean, d_value, grads);
  }

  // Entropy bonus; state-independent for a diagonal Gaussian.
  grads.log_std[0] -= hypers.entropy_coef;
  grads.log_std[1] -= hypers.entropy_coef;

  const double entropy = gaussian_entropy(params.log_std);
  const double loss = policy_loss * inv_m +
                      hypers.value_coef * value_loss * inv_m -
                      hypers.entropy_coef * entropy;
  if (stats != nullptr) {
    stats->policy_loss += policy_loss * inv_m;
    stats->value_loss += value_loss * inv_m;
    stats->entropy += entropy;
  }
  return loss;
}

UpdateStats ppo_update(PolicyParams& params, AdamState& adam,
                       const RolloutBatch& batch, const PpoHypers& hypers,
                       SplitMix64& rng) {
  const std::size_t n = batch.size();
  if (n == 0) return {};
  if (batch.advantages.size() != n || batch.returns.size() != n) {
    throw DimensionMismatch("ppo_update: advantages/returns not populated");
  }

  std::vector<double> advantages = batch.advantages;
  normalize_advantages(advantages);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  PolicyGrads grads(params);
  UpdateStats stats;
  long long stat_count = 0;

  for (int epoch = 0; epoch < hypers.epochs; ++epoch) {
    // Fisher-Yates with the update stream.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)));
      std::swap(order[i], order[j]);
    }

    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(hypers.minibatch_size)) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(hypers.minibatch_size));
      grads.zero();

      const double loss =
          ppo_minibatch(params, batch,
                        std::span<const std::size_t>(order.data() + start,
                                                     end - start),
                        advantages, hypers, grads, &stats);
      ++stat_count;
      if (!std::isfinite(loss)) {
        throw NonFiniteLoss("ppo_update: non-finite loss");
      }

      const double grad_norm = global_grad_norm(grads);
      if (!std::isfinite(grad_norm)) {
        throw NonFiniteLoss("ppo_update: non-finite gradient");
      }
      if (grad_norm > hypers.max_grad_norm && grad_norm > 0.0) {
        scale_grads(grads, hypers.max_grad_norm / grad_norm);
      }
      adam_step(params, grads, adam, hypers.lr);
    }
  }

  if (stat_count > 0) {
    stats.policy_loss /= static_cast<double>(stat_count);
    stats.value_loss /= static_cast<double>(stat_count);
    stats.entropy /= static_cast<double>(stat_count);
  }
  return stats;
}

namespace {

// Running variance of the per-env discounted return, used to scale rewards
// to roughly unit variance before they enter GAE (the VecNormalize
// convention). Without it the value-loss gradients on +-30-scale returns
// consume the whole global-norm clip budget and starve the policy gradient.
struct ReturnScaler {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(double g) {
    count += 1.0;
    const double delta = g - mean;
    mean += delta / count;
    m2 += delta * (g - mean);
  }
  void merge(const ReturnScaler& other) {
    if (other.count == 0.0) return;
    if (count == 0.0) {
      *this = other;
      return;
    }
    const double total = count + other.count;
    const double delta = other.mean - mean;
    m2 += other.m2 + delta * delta * count * other.count / total;
    mean += delta * other.count / total;
    count = total;
  }
  // Divide by the return std only; rewards keep their sign and zero point.
  double scale(double reward) const {
    if (count < 2.0) return reward;
    const double std = std::sqrt(m2 / count);
    return std::clamp(reward / (std + 1e-8), -10.0, 10.0);
  }
};

// One training environment: engine, potential tracker, action stream, and
// the rollout buffers it fills. Strictly env-local so rollouts can run on
// any worker without changing results.
struct EnvSlot {
  explicit EnvSlot(const TrainConfig& cfg, int index)
      : cfg_(cfg),
        index_(index),
        tracker_(cfg.shaping, cfg.arena, cfg.n_max),
        action_rng_(derive_stream(cfg.seed, kStreamAction,
                                  static_cast<std::uint64_t>(index))),
        partial_(cfg.encoder.observation_dim(), cfg.normalizer_clip,
                 cfg.normalizer_eps) {
    reset();
  }

  void reset() {
    const std::uint64_t episode_seed =
        derive_stream(cfg_.seed, kStreamEnv, static_cast<std::uint64_t>(index_),
                      static_cast<std::uint64_t>(episode_counter_++));
    WorldState world =
        sample_episode(cfg_.arena, cfg_.n_min, cfg_.n_max, episode_seed,
                       cfg_.controller, cfg_.controller_params, cfg_.scenario);
    engine_ = std::make_unique<Engine>(std::move(world), cfg_.arena,
                                       cfg_.scenario, cfg_.sim);
    tracker_.reset(engine_->world());
    obs_raw_ = encode(engine_->world(), cfg_.encoder);
    ep_ext_return_ = 0.0;
  }

  // Collects `rollout_len` transitions using the frozen statistics snapshots.
  void collect(const PolicyParams& params, const RunningNormalizer& snapshot,
               const ReturnScaler& reward_scale, double beta, int rollout_len) {
    const int obs_dim = cfg_.encoder.observation_dim();
    obs_norm_.resize(static_cast<std::size_t>(rollout_len) * obs_dim);
    actions_.resize(static_cast<std::size_t>(rollout_len));
    log_probs_.resize(static_cast<std::size_t>(rollout_len));
    rewards_.resize(static_cast<std::size_t>(rollout_len));
    values_.resize(static_cast<std::size_t>(rollout_len));
    dones_.resize(static_cast<std::size_t>(rollout_len));
    finished_episodes_.clear();

    for (int t = 0; t < rollout_len; ++t) {
      const Observation normalized = snapshot.normalize(obs_raw_);
      std::copy(normalized.begin(), normalized.end(),
                obs_norm_.begin() + static_cast<std::size_t>(t) * obs_dim);

      const PolicyOutput out = policy_forward(params, normalized);
      const ActionSample sample =
          sample_action(out.mean, params.log_std, action_rng_);

      const WorldState prev_world = engine_->world();
      const StepEvents events = engine_->step({sample.action});
      const double ext = extrinsic_reward(prev_world, engine_->world(), events,
                                          sample.action, cfg_.extrinsic);
      const double pss = tracker_.step_reward(engine_->world());
      const double reward = total_reward(ext, pss, beta);

      actions_[static_cast<std::size_t>(t)] = sample.action;
      log_probs_[static_cast<std::size_t>(t)] = sample.log_prob;
      values_[static_cast<std::size_t>(t)] = out.value;
      rewards_[static_cast<std::size_t>(t)] = reward_scale.scale(reward);
      ep_ext_return_ += ext;
      discounted_return_ = reward + cfg_.shaping.gamma * discounted_return_;
      return_partial_.update(discounted_return_);

      const bool done = engine_->finished();
      dones_[static_cast<std::size_t>(t)] = done ? 1 : 0;
      if (done) {
        finished_episodes_.emplace_back(
            ep_ext_return_,
            engine_->outcome()->kind == OutcomeKind::SafeSuccess);
        reset();
        discounted_return_ = 0.0;
      } else {
        obs_raw_ = encode(engine_->world(), cfg_.encoder);
      }
      partial_.update(obs_raw_);
    }

    bootstrap_ = policy_forward(params, snapshot.normalize(obs_raw_)).value;
  }

  const TrainConfig& cfg_;
  int index_;
  std::unique_ptr<Engine> engine_;
  PotentialTracker tracker_;
  SplitMix64 action_rng_;
  RunningNormalizer partial_;
  ReturnScaler return_partial_;
  Observation obs_raw_;
  long long episode_counter_ = 0;
  double ep_ext_return_ = 0.0;
  double discounted_return_ = 0.0;

  std::vector<double> obs_norm_;
  std::vector<Vec2> actions_;
  std::vector<double> log_probs_;
  std::vector<double> rewards_;
  std::vector<double> values_;
  std::vector<std::uint8_t> dones_;
  std::vector<std::pair<double, bool>> finished_episodes_;
  double bootstrap_ = 0.0;
};

void parallel_for_envs(std::vector<std::unique_ptr<EnvSlot>>& envs,
                       int n_threads,
                       const std::function<void(EnvSlot&)>& work) {
  if (n_threads <= 1 || envs.size() <= 1) {
    for (auto& env : envs) work(*env);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const int workers =
      std::min<int>(n_threads, static_cast<int>(envs.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= envs.size()) return;
          work(*envs[i]);
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const LogSink& on_log,
                  const CheckpointSink& on_checkpoint,
                  const TrainSnapshot* resume) {
  const int obs_dim = cfg.encoder.observation_dim();

  SplitMix64 init_rng(derive_stream(cfg.seed, kStreamInit));
  SplitMix64 update_rng(derive_stream(cfg.seed, kStreamUpdate));

  TrainResult result;
  long long global_step = 0;
  if (resume != nullptr) {
    result.params = resume->params;
    result.normalizer = resume->normalizer;
    global_step = resume->step;
    if (result.params.obs_dim != obs_dim) {
      throw DimensionMismatch("train: checkpoint obs_dim " +
                              std::to_string(result.params.obs_dim) +
                              " does not match configured " +
                              std::to_string(obs_dim));
    }
  } else {
    result.params =
        PolicyParams::init(obs_dim, cfg.hidden, cfg.init_log_std, init_rng);
    result.normalizer =
        RunningNormalizer(obs_dim, cfg.normalizer_clip, cfg.normalizer_eps);
  }
  AdamState adam(result.params);

  std::vector<std::unique_ptr<EnvSlot>> envs;
  envs.reserve(static_cast<std::size_t>(cfg.n_envs));
  for (int e = 0; e < cfg.n_envs; ++e) {
    envs.push_back(std::make_unique<EnvSlot>(cfg, e));
    // Seed the statistics so the very first normalize is well-defined.
    result.normalizer.update(envs.back()->obs_raw_);
  }

  std::deque<std::pair<double, bool>> episode_window;  // trailing 100 episodes
  long long episodes_done = 0;
  long long next_checkpoint = cfg.checkpoint_interval;
  ReturnScaler return_scale;

  const long long steps_per_iter =
      static_cast<long long>(cfg.n_envs) * cfg.rollout_len;

  while (global_step < cfg.total_steps) {
    const double beta = beta_at(global_step, cfg.shaping);
    const RunningNormalizer snapshot = result.normalizer;
    const ReturnScaler scale_snapshot = return_scale;

    parallel_for_envs(envs, cfg.n_threads, [&](EnvSlot& env) {
      env.collect(result.params, snapshot, scale_snapshot, beta,
                  cfg.rollout_len);
    });

    // Merge partial statistics and episode results in fixed env order.
    for (auto& env : envs) {
      result.normalizer.merge(env->partial_);
      env->partial_ = RunningNormalizer(obs_dim, cfg.normalizer_clip,
                                        cfg.normalizer_eps);
      return_scale.merge(env->return_partial_);
      env->return_partial_ = ReturnScaler();
      for (const auto& ep : env->finished_episodes_) {
        episode_window.push_back(ep);
        if (episode_window.size() > 100) episode_window.pop_front();
        ++episodes_done;
      }
    }

    RolloutBatch batch;
    batch.obs_dim = obs_dim;
    batch.observations.reserve(static_cast<std::size_t>(steps_per_iter) *
                               static_cast<std::size_t>(obs_dim));
    for (auto& env : envs) {
      const GaeResult g = gae(env->rewards_, env->values_, env->dones_,
                              env->bootstrap_, cfg.shaping.gamma,
                              cfg.ppo.gae_lambda);
      batch.observations.insert(batch.observations.end(),
                                env->obs_norm_.begin(), env->obs_norm_.end());
      batch.actions.insert(batch.actions.end(), env->actions_.begin(),
                           env->actions_.end());
      batch.log_probs.insert(batch.log_probs.end(), env->log_probs_.begin(),
                             env->log_probs_.end());
      batch.rewards.insert(batch.rewards.end(), env->rewards_.begin(),
                           env->rewards_.end());
      batch.values.insert(batch.values.end(), env->values_.begin(),
                          env->values_.end());
      batch.dones.insert(batch.dones.end(), env->dones_.begin(),
                         env->dones_.end());
      batch.advantages.insert(batch.advantages.end(), g.advantages.begin(),
                              g.advantages.end());
      batch.returns.insert(batch.returns.end(), g.returns.begin(),
                           g.returns.end());
    }

    const UpdateStats stats =
        ppo_update(result.params, adam, batch, cfg.ppo, update_rng);
    global_step += steps_per_iter;

    TrainLogRow row;
    row.step = global_step;
    row.beta = beta;
    row.policy_loss = stats.policy_loss;
    row.value_loss = stats.value_loss;
    row.entropy = stats.entropy;
    row.episodes_done = episodes_done;
    if (!episode_window.empty()) {
      double sum = 0.0;
      double safe = 0.0;
      for (const auto& [ret, ok] : episode_window) {
        sum += ret;
        if (ok) safe += 1.0;
      }
      row.mean_ext_return = sum / static_cast<double>(episode_window.size());
      row.safe_success_rate = safe / static_cast<double>(episode_window.size());
    }
    result.log.push_back(row);
    if (on_log) on_log(row);

    if (on_checkpoint && global_step >= next_checkpoint) {
      on_checkpoint(result.params, result.normalizer, global_step);
      while (next_checkpoint <= global_step) {
        next_checkpoint += cfg.checkpoint_interval;
      }
    }
  }

  result.steps = global_step;
  if (on_checkpoint) {
    on_checkpoint(result.params, result.normalizer, global_step);
  }
  return result;
}

}  // namespace crowdnav
