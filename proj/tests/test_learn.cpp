#include <doctest.h>

#include <cmath>

#include "crowdnav/errors.hpp"
#include "crowdnav/learn.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;

namespace {

RolloutBatch random_batch(SplitMix64& rng, int obs_dim, std::size_t n) {
  RolloutBatch batch;
  batch.obs_dim = obs_dim;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < obs_dim; ++k) {
      batch.observations.push_back(rng.uniform(-1.0, 1.0));
    }
    batch.actions.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    batch.log_probs.push_back(rng.uniform(-3.0, -1.0));
    batch.values.push_back(rng.uniform(-1.0, 1.0));
    batch.rewards.push_back(rng.uniform(-1.0, 1.0));
    batch.dones.push_back(0);
    batch.advantages.push_back(rng.uniform(-2.0, 2.0));
    batch.returns.push_back(rng.uniform(-2.0, 2.0));
  }
  return batch;
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.n_min = 2;
  cfg.n_max = 3;
  cfg.total_steps = 512;
  cfg.n_envs = 2;
  cfg.rollout_len = 32;
  cfg.ppo.minibatch_size = 32;
  cfg.hidden = 16;
  cfg.seed = 9;
  cfg.checkpoint_interval = 100000;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("learn");

TEST_CASE("policy forward pass") {
  SplitMix64 rng(1);

  SUBCASE("zero network maps everything to zero") {
    PolicyParams params = PolicyParams::init(4, 8, -0.5, rng);
    for (auto& [name, tensor] : params.tensors()) {
      std::fill(tensor->begin(), tensor->end(), 0.0);
    }
    const PolicyOutput out =
        policy_forward(params, std::vector<double>{0.3, -0.2, 0.9, 0.0});
    CHECK(out.mean == Vec2{0.0, 0.0});
    CHECK(out.value == 0.0);
  }

  SUBCASE("deterministic for fixed inputs") {
    const PolicyParams params = PolicyParams::init(6, 8, -0.5, rng);
    const std::vector<double> obs = {0.1, 0.2, -0.4, 0.5, 0.0, -1.0};
    const PolicyOutput a = policy_forward(params, obs);
    const PolicyOutput b = policy_forward(params, obs);
    CHECK(a.mean == b.mean);
    CHECK(a.value == b.value);
  }

  SUBCASE("outputs respond linearly to small weight perturbations") {
    PolicyParams params = PolicyParams::init(3, 6, -0.5, rng);
    const std::vector<double> obs = {0.4, -0.3, 0.8};
    const double base = policy_forward(params, obs).value;
    const double delta = 1e-6;
    params.w_v[2] += delta;
    const double bumped = policy_forward(params, obs).value;
    // dv/dw_v[2] = h2[2]; recover it and cross-check with a larger step.
    const double slope = (bumped - base) / delta;
    params.w_v[2] += 9.0 * delta;
    const double bumped10 = policy_forward(params, obs).value;
    CHECK((bumped10 - base) / (10.0 * delta) ==
          doctest::Approx(slope).epsilon(1e-6));
  }

  SUBCASE("wrong observation length is rejected") {
    const PolicyParams params = PolicyParams::init(5, 8, -0.5, rng);
    CHECK_THROWS_AS(policy_forward(params, std::vector<double>{1.0, 2.0}),
                    DimensionMismatch);
  }
}

TEST_CASE("action sampling") {
  SUBCASE("degenerate variance collapses onto the mean") {
    SplitMix64 rng(2);
    const std::vector<double> log_std = {-10.0, -10.0};
    const ActionSample s = sample_action({0.4, -0.7}, log_std, rng);
    CHECK(s.action.x == doctest::Approx(0.4).epsilon(1e-4));
    CHECK(s.action.y == doctest::Approx(-0.7).epsilon(1e-4));
  }

  SUBCASE("log density at the mean with unit std is -log(2 pi)") {
    const std::vector<double> log_std = {0.0, 0.0};
    CHECK(gaussian_log_prob({1.0, 2.0}, {1.0, 2.0}, log_std) ==
          doctest::Approx(-1.8378770664093453).epsilon(1e-12));
  }

  SUBCASE("same stream gives the same sample") {
    const std::vector<double> log_std = {-0.5, -0.5};
    SplitMix64 a(77), b(77);
    const ActionSample sa = sample_action({0.0, 0.0}, log_std, a);
    const ActionSample sb = sample_action({0.0, 0.0}, log_std, b);
    CHECK(sa.action == sb.action);
    CHECK(sa.log_prob == sb.log_prob);
  }

  SUBCASE("entropy matches the closed form") {
    const std::vector<double> log_std = {-0.3, 0.7};
    const double expected =
        (-0.3 + 0.7) + 2.0 * 0.5 * std::log(2.0 * 3.14159265358979323846 *
                                            2.71828182845904523536);
    CHECK(gaussian_entropy(log_std) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("gae identities") {
  SUBCASE("lambda 0 reduces to one-step TD errors") {
    const std::vector<double> rewards = {1.0, -0.5, 2.0};
    const std::vector<double> values = {0.3, 0.1, -0.2};
    const std::vector<std::uint8_t> dones = {0, 0, 0};
    const GaeResult g = gae(rewards, values, dones, 0.7, 0.99, 0.0);
    CHECK(g.advantages[0] ==
          doctest::Approx(1.0 + 0.99 * 0.1 - 0.3).epsilon(1e-12));
    CHECK(g.advantages[2] ==
          doctest::Approx(2.0 + 0.99 * 0.7 + 0.2).epsilon(1e-12));
  }

  SUBCASE("gamma=lambda=1 with zero values gives reward-to-go") {
    const std::vector<double> rewards = {1.0, 2.0, 3.0};
    const std::vector<double> values = {0.0, 0.0, 0.0};
    const std::vector<std::uint8_t> dones = {0, 0, 0};
    const GaeResult g = gae(rewards, values, dones, 0.0, 1.0, 1.0);
    CHECK(g.advantages[0] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(g.advantages[1] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(g.advantages[2] == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("single terminal transition") {
    const std::vector<double> rewards = {1.0};
    const std::vector<double> values = {0.0};
    const std::vector<std::uint8_t> dones = {1};
    const GaeResult g = gae(rewards, values, dones, 123.0, 0.99, 0.95);
    CHECK(g.advantages[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.returns[0] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("matches the brute-force double loop on random sequences") {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 100;
      std::vector<double> rewards(n), values(n);
      std::vector<std::uint8_t> dones(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        rewards[i] = rng.uniform(-2.0, 2.0);
        values[i] = rng.uniform(-2.0, 2.0);
        dones[i] = rng.next_double() < 0.05 ? 1 : 0;
      }
      const double bootstrap = rng.uniform(-2.0, 2.0);
      const GaeResult g = gae(rewards, values, dones, bootstrap, 0.99, 0.95);
      const auto expected =
          oracles::brute_force_gae(rewards, values, dones, bootstrap, 0.99, 0.95);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(g.advantages[i] == doctest::Approx(expected[i]).epsilon(1e-9));
        CHECK(g.returns[i] ==
              doctest::Approx(expected[i] + values[i]).epsilon(1e-9));
      }
    }
  }

  SUBCASE("misaligned arrays are rejected") {
    CHECK_THROWS_AS(gae(std::vector<double>{1.0}, std::vector<double>{},
                        std::vector<std::uint8_t>{0}, 0.0, 0.99, 0.95),
                    DimensionMismatch);
  }
}

TEST_CASE("advantage normalization hits mean 0 and std 1") {
  SplitMix64 rng(4);
  std::vector<double> advantages(977);
  for (auto& a : advantages) a = rng.uniform(-30.0, 10.0);
  normalize_advantages(advantages);
  double mean = 0.0;
  for (const double a : advantages) mean += a;
  mean /= static_cast<double>(advantages.size());
  double var = 0.0;
  for (const double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(advantages.size());
  CHECK(std::abs(mean) < 1e-7);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
}

TEST_CASE("ppo surrogate behaviour at the identity ratio") {
  SplitMix64 rng(5);
  PolicyParams params = PolicyParams::init(4, 6, -0.5, rng);
  RolloutBatch batch = random_batch(rng, 4, 16);
  // Make stored log-probs equal to the current policy's: ratio == 1, so the
  // (unnormalized) policy loss equals -mean(advantage).
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::span<const double> obs(batch.observations.data() + i * 4, 4);
    const PolicyOutput out = policy_forward(params, obs);
    batch.log_probs[i] =
        gaussian_log_prob(batch.actions[i], out.mean, params.log_std);
  }
  std::vector<std::size_t> indices(batch.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  PolicyGrads grads(params);
  grads.zero();
  UpdateStats stats;
  ppo_minibatch(params, batch, indices, batch.advantages, PpoHypers{}, grads,
                &stats);
  double mean_adv = 0.0;
  for (const double a : batch.advantages) mean_adv += a;
  mean_adv /= static_cast<double>(batch.size());
  CHECK(stats.policy_loss == doctest::Approx(-mean_adv).epsilon(1e-9));
}

TEST_CASE("zero clip range pins the surrogate to the clipped branch") {
  SplitMix64 rng(6);
  PolicyParams params = PolicyParams::init(3, 6, -0.5, rng);
  RolloutBatch batch = random_batch(rng, 3, 8);
  std::vector<std::size_t> indices(batch.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  PpoHypers hypers;
  hypers.clip_eps = 0.0;
  hypers.value_coef = 0.0;
  hypers.entropy_coef = 0.0;
  PolicyGrads grads(params);
  grads.zero();
  UpdateStats stats;
  ppo_minibatch(params, batch, indices, batch.advantages, hypers, grads, &stats);

  // With eps = 0 the clipped branch is exactly ratio 1: the loss must equal
  // -mean(min(ratio * A, A)).
  double expected = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::span<const double> obs(batch.observations.data() + i * 3, 3);
    const PolicyOutput out = policy_forward(params, obs);
    const double ratio =
        std::exp(gaussian_log_prob(batch.actions[i], out.mean, params.log_std) -
                 batch.log_probs[i]);
    expected += -std::min(ratio * batch.advantages[i], batch.advantages[i]);
  }
  expected /= static_cast<double>(batch.size());
  CHECK(stats.policy_loss == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("analytic gradients match central finite differences") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    PolicyParams params = PolicyParams::init(4, 2, -0.4, rng);
    for (auto& [name, tensor] : params.tensors()) {
      for (double& v : *tensor) v += rng.uniform(-0.2, 0.2);
    }
    RolloutBatch batch = random_batch(rng, 4, 8);
    CHECK(oracles::ppo_gradcheck_worst_error(params, batch) < 1e-4);
  }
}

TEST_CASE("non-finite advantages abort the update") {
  SplitMix64 rng(8);
  PolicyParams params = PolicyParams::init(3, 4, -0.5, rng);
  AdamState adam(params);
  RolloutBatch batch = random_batch(rng, 3, 8);
  batch.advantages[3] = std::numeric_limits<double>::infinity();
  SplitMix64 update_rng(1);
  CHECK_THROWS_AS(ppo_update(params, adam, batch, PpoHypers{}, update_rng),
                  NonFiniteLoss);
}

TEST_CASE("train with zero steps returns the seeded initialization") {
  TrainConfig cfg = tiny_train_config();
  cfg.total_steps = 0;
  const TrainResult a = train(cfg);
  const TrainResult b = train(cfg);
  CHECK(a.steps == 0);
  CHECK(a.params.w1 == b.params.w1);
  CHECK(a.params.log_std == b.params.log_std);
  CHECK(a.log.empty());
}

TEST_CASE("training is bitwise reproducible and thread-count independent") {
  TrainConfig cfg = tiny_train_config();
  const TrainResult serial_a = train(cfg);
  const TrainResult serial_b = train(cfg);
  cfg.n_threads = 2;
  const TrainResult parallel = train(cfg);

  const auto tensors_a = serial_a.params.tensors();
  const auto tensors_b = serial_b.params.tensors();
  const auto tensors_p = parallel.params.tensors();
  for (std::size_t k = 0; k < tensors_a.size(); ++k) {
    CHECK(*tensors_a[k].second == *tensors_b[k].second);
    CHECK(*tensors_a[k].second == *tensors_p[k].second);
  }
  CHECK(serial_a.normalizer.mean() == parallel.normalizer.mean());
  CHECK(serial_a.normalizer.m2() == parallel.normalizer.m2());
  CHECK(serial_a.normalizer.count() == parallel.normalizer.count());
}

TEST_CASE("beta column follows the configured schedule") {
  TrainConfig cfg = tiny_train_config();
  cfg.shaping.mode = ShapingMode::None;
  const TrainResult none = train(cfg);
  REQUIRE(!none.log.empty());
  for (const auto& row : none.log) CHECK(row.beta == 0.0);

  cfg.shaping.mode = ShapingMode::PssSocial;
  cfg.shaping.beta0 = 1.0;
  cfg.shaping.beta_final = 0.2;
  cfg.shaping.anneal_steps = 256;
  const TrainResult social = train(cfg);
  REQUIRE(!social.log.empty());
  CHECK(social.log.front().beta == 1.0);  // logged at each iteration start
  CHECK(social.log.back().beta < 1.0);
}

TEST_CASE("resume continues the step counter") {
  TrainConfig cfg = tiny_train_config();
  const TrainResult first = train(cfg);
  TrainSnapshot snapshot{first.params, first.normalizer, first.steps};
  cfg.total_steps = first.steps + 128;
  const TrainResult resumed = train(cfg, {}, {}, &snapshot);
  CHECK(resumed.steps >= cfg.total_steps);
  REQUIRE(!resumed.log.empty());
  CHECK(resumed.log.front().step > first.steps);
}

TEST_SUITE_END();
