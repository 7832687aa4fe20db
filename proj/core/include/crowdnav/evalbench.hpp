#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "crowdnav/encoder.hpp"
#include "crowdnav/mlp.hpp"
#include "crowdnav/sim.hpp"
#include "crowdnav/world.hpp"

namespace crowdnav {

// Ego controller interface for evaluation. reset() is called once per
// episode with the fresh world and the episode seed, so stochastic policies
// stay deterministic per episode and independent of scheduling.
class EgoPolicy {
 public:
  virtual ~EgoPolicy() = default;
  virtual std::string id() const = 0;
  virtual void reset(const WorldState& world0, std::uint64_t episode_seed);
  virtual Vec2 act(const WorldState& world) = 0;
};

class OrcaEgoPolicy final : public EgoPolicy {
 public:
  OrcaEgoPolicy(const OrcaParams& params, double dt)
      : params_(params), dt_(dt) {}
  std::string id() const override { return "orca"; }
  Vec2 act(const WorldState& world) override;

 private:
  OrcaParams params_;
  double dt_;
};

class SfmEgoPolicy final : public EgoPolicy {
 public:
  SfmEgoPolicy(const SfmParams& params, double dt)
      : params_(params), dt_(dt) {}
  std::string id() const override { return "sfm"; }
  Vec2 act(const WorldState& world) override;

 private:
  SfmParams params_;
  double dt_;
};

// Uniform random velocity commands in [-v_max, v_max]^2, reseeded per episode.
class RandomEgoPolicy final : public EgoPolicy {
 public:
  explicit RandomEgoPolicy(double v_max) : v_max_(v_max), rng_(0) {}
  std::string id() const override { return "random"; }
  void reset(const WorldState& world0, std::uint64_t episode_seed) override;
  Vec2 act(const WorldState& world) override;

 private:
  double v_max_;
  SplitMix64 rng_;
};

// Frozen learned policy: encode, normalize with the stored statistics, and
// command the deterministic action mean.
class LearnedEgoPolicy final : public EgoPolicy {
 public:
  LearnedEgoPolicy(PolicyParams params, RunningNormalizer normalizer,
                   EncoderConfig encoder, std::string id = "policy");
  std::string id() const override { return id_; }
  Vec2 act(const WorldState& world) override;

 private:
  PolicyParams params_;
  RunningNormalizer normalizer_;
  EncoderConfig encoder_;
  std::string id_;
};

// One post-integration simulator step, as recorded in traces.
struct StepRecord {
  int t = 0;
  Vec2 ego_position, ego_velocity;
  Vec2 action;
  std::vector<std::array<double, 4>> pedestrians;  // px, py, vx, vy
  std::vector<int> collisions;
  bool reached_goal = false;
  bool frozen = false;
};

struct EpisodeRecord {
  std::string method;
  std::uint64_t sweep_seed = 0;    // outer evaluation seed
  long long episode_index = 0;     // index within (method, N, seed)
  std::uint64_t episode_seed = 0;  // stream that generated the scenario
  int n = 0;
  std::string ped_controller;
  Outcome outcome;
  double freeze_fraction = 0.0;  // frozen steps / steps taken
  double final_goal_distance = 0.0;
  std::vector<StepRecord> trace;  // populated only when requested
};

// Rolls one episode to termination. The returned record always carries the
// outcome summary; the per-step trace is kept only when keep_trace is set.
EpisodeRecord run_episode(EgoPolicy& policy, WorldState world0,
                          const ArenaConfig& arena,
                          const ScenarioConfig& scenario, const SimConfig& sim,
                          bool keep_trace = false);

struct MetricsRow {
  std::string method;
  int n = 0;
  long long episodes = 0;
  double safe_success_mean = 0.0;
  double safe_success_std = 0.0;  // sample std across seeds
  double unsafe_success_mean = 0.0;
  double timeout_mean = 0.0;
  double collisions_per_episode_mean = 0.0;
  double freezing_rate_mean = 0.0;
};

struct MetricsSummary {
  std::vector<MetricsRow> rows;  // sorted by (method, n)
};

// Aggregates per (method, N, seed) then reports mean and 1-sample-std across
// seeds. Throws EmptyInput on an empty record list.
MetricsSummary compute_metrics(const std::vector<EpisodeRecord>& records);

struct SweepConfig {
  std::vector<int> densities = {11, 13, 15, 17, 19, 21};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int episodes_per_seed = 100;
};

using PolicyFactory = std::function<std::unique_ptr<EgoPolicy>()>;

// Runs episodes_per_seed episodes for every (N, seed) pair with per-episode
// scenario streams derived from (seed, N, episode index). Episodes are
// embarrassingly parallel; records land in a fixed order so the output is
// byte-identical for any worker count.
std::vector<EpisodeRecord> density_sweep(const PolicyFactory& make_policy,
                                         const SweepConfig& sweep,
                                         const ArenaConfig& arena,
                                         const ScenarioConfig& scenario,
                                         const SimConfig& sim,
                                         PedController controller,
                                         const ControllerParams& params,
                                         int n_threads = 1);

// Raw CSV: method,N,seed,episode,outcome,collision_steps,freeze_fraction,
// steps_taken,final_goal_distance
std::string write_raw_csv(const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> parse_raw_csv(const std::string& text);

// Summary CSV: method,N,safe_success_mean,safe_success_std,
// collisions_per_ep_mean,freezing_rate_mean,timeout_rate,n_episodes
std::string write_summary_csv(const MetricsSummary& summary);

}  // namespace crowdnav
