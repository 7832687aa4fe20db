#include "crowdnav/evalbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "crowdnav/errors.hpp"
#include "crowdnav/numio.hpp"
#include "crowdnav/peds.hpp"

namespace crowdnav {

void EgoPolicy::reset(const WorldState&, std::uint64_t) {}

Vec2 OrcaEgoPolicy::act(const WorldState& world) {
  return orca_velocity(0, world, params_, dt_);
}

Vec2 SfmEgoPolicy::act(const WorldState& world) {
  return sfm_velocity(0, world, params_, dt_);
}

void RandomEgoPolicy::reset(const WorldState&, std::uint64_t episode_seed) {
  rng_ = SplitMix64(derive_stream(episode_seed, kStreamPolicy));
}

Vec2 RandomEgoPolicy::act(const WorldState&) {
  const double vx = rng_.uniform(-v_max_, v_max_);
  const double vy = rng_.uniform(-v_max_, v_max_);
  return {vx, vy};
}

LearnedEgoPolicy::LearnedEgoPolicy(PolicyParams params,
                                   RunningNormalizer normalizer,
                                   EncoderConfig encoder, std::string id)
    : params_(std::move(params)),
      normalizer_(std::move(normalizer)),
      encoder_(std::move(encoder)),
      id_(std::move(id)) {}

Vec2 LearnedEgoPolicy::act(const WorldState& world) {
  const Observation obs = normalizer_.normalize(encode(world, encoder_));
  return policy_forward(params_, obs).mean;
}

EpisodeRecord run_episode(EgoPolicy& policy, WorldState world0,
                          const ArenaConfig& arena,
                          const ScenarioConfig& scenario, const SimConfig& sim,
                          bool keep_trace) {
  EpisodeRecord record;
  record.method = policy.id();
  record.episode_seed = world0.context.seed;
  record.n = world0.context.pedestrian_count;
  record.ped_controller =
      world0.context.controller == PedController::Orca ? "orca" : "sfm";

  policy.reset(world0, world0.context.seed);
  Engine engine(std::move(world0), arena, scenario, sim);

  int frozen_steps = 0;
  while (!engine.finished()) {
    const Vec2 command = policy.act(engine.world());
    const StepEvents events = engine.step({command});
    if (events.ego_frozen) ++frozen_steps;
    if (keep_trace) {
      StepRecord step;
      step.t = engine.world().step_index;
      step.ego_position = engine.world().ego.position;
      step.ego_velocity = engine.world().ego.velocity;
      step.action = command;
      step.pedestrians.reserve(engine.world().pedestrians.size());
      for (const auto& ped : engine.world().pedestrians) {
        step.pedestrians.push_back(
            {ped.position.x, ped.position.y, ped.velocity.x, ped.velocity.y});
      }
      step.collisions = events.collisions;
      step.reached_goal = events.ego_reached_goal;
      step.frozen = events.ego_frozen;
      record.trace.push_back(std::move(step));
    }
  }

  record.outcome = *engine.outcome();
  record.freeze_fraction =
      record.outcome.steps_taken > 0
          ? static_cast<double>(frozen_steps) / record.outcome.steps_taken
          : 0.0;
  record.final_goal_distance =
      norm(engine.world().ego.position - engine.world().ego.goal);
  return record;
}

MetricsSummary compute_metrics(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw EmptyInput("compute_metrics: no records");

  struct SeedStats {
    long long episodes = 0;
    long long safe = 0, unsafe = 0, timeout = 0;
    double collision_steps = 0.0;
    double freeze = 0.0;
  };
  std::map<std::pair<std::string, int>, std::map<std::uint64_t, SeedStats>>
      groups;
  for (const auto& rec : records) {
    SeedStats& s = groups[{rec.method, rec.n}][rec.sweep_seed];
    ++s.episodes;
    switch (rec.outcome.kind) {
      case OutcomeKind::SafeSuccess: ++s.safe; break;
      case OutcomeKind::UnsafeSuccess: ++s.unsafe; break;
      case OutcomeKind::Timeout: ++s.timeout; break;
    }
    s.collision_steps += rec.outcome.total_collision_steps;
    s.freeze += rec.freeze_fraction;
  }

  MetricsSummary summary;
  for (const auto& [key, seeds] : groups) {
    MetricsRow row;
    row.method = key.first;
    row.n = key.second;

    std::vector<double> safe_rates;
    double unsafe_sum = 0.0, timeout_sum = 0.0, coll_sum = 0.0, freeze_sum = 0.0;
    for (const auto& [seed, s] : seeds) {
      const double count = static_cast<double>(s.episodes);
      safe_rates.push_back(static_cast<double>(s.safe) / count);
      unsafe_sum += static_cast<double>(s.unsafe) / count;
      timeout_sum += static_cast<double>(s.timeout) / count;
      coll_sum += s.collision_steps / count;
      freeze_sum += s.freeze / count;
      row.episodes += s.episodes;
    }
    const double n_seeds = static_cast<double>(seeds.size());
    double safe_mean = 0.0;
    for (const double r : safe_rates) safe_mean += r;
    safe_mean /= n_seeds;
    double safe_var = 0.0;
    for (const double r : safe_rates) safe_var += (r - safe_mean) * (r - safe_mean);
    row.safe_success_mean = safe_mean;
    row.safe_success_std =
        safe_rates.size() > 1 ? std::sqrt(safe_var / (n_seeds - 1.0)) : 0.0;
    row.unsafe_success_mean = unsafe_sum / n_seeds;
    row.timeout_mean = timeout_sum / n_seeds;
    row.collisions_per_episode_mean = coll_sum / n_seeds;
    row.freezing_rate_mean = freeze_sum / n_seeds;
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

std::vector<EpisodeRecord> density_sweep(const PolicyFactory& make_policy,
                                         const SweepConfig& sweep,
                                         const ArenaConfig& arena,
                                         const ScenarioConfig& scenario,
                                         const SimConfig& sim,
                                         PedController controller,
                                         const ControllerParams& params,
                                         int n_threads) {
  struct Spec {
    int n;
    std::uint64_t seed;
    long long episode;
  };
  std::vector<Spec> specs;
  for (const int n : sweep.densities) {
    for (const std::uint64_t seed : sweep.seeds) {
      for (int e = 0; e < sweep.episodes_per_seed; ++e) {
        specs.push_back({n, seed, e});
      }
    }
  }

  std::vector<EpisodeRecord> records(specs.size());
  const auto run_one = [&](std::size_t i) {
    const Spec& spec = specs[i];
    const std::uint64_t episode_seed =
        derive_stream(spec.seed, static_cast<std::uint64_t>(spec.n),
                      static_cast<std::uint64_t>(spec.episode));
    WorldState world = sample_episode(arena, spec.n, spec.n, episode_seed,
                                      controller, params, scenario);
    const std::unique_ptr<EgoPolicy> policy = make_policy();
    EpisodeRecord rec =
        run_episode(*policy, std::move(world), arena, scenario, sim);
    rec.sweep_seed = spec.seed;
    rec.episode_index = spec.episode;
    records[i] = std::move(rec);
  };

  const int workers = std::max(1, std::min<int>(n_threads, static_cast<int>(specs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        try {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            run_one(i);
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
  return records;
}

std::string write_raw_csv(const std::vector<EpisodeRecord>& records) {
  std::string out =
      "method,N,seed,episode,outcome,collision_steps,freeze_fraction,"
      "steps_taken,final_goal_distance\n";
  for (const auto& rec : records) {
    out += rec.method;
    out += ',';
    out += std::to_string(rec.n);
    out += ',';
    out += std::to_string(rec.sweep_seed);
    out += ',';
    out += std::to_string(rec.episode_index);
    out += ',';
    out += outcome_name(rec.outcome.kind);
    out += ',';
    out += std::to_string(rec.outcome.total_collision_steps);
    out += ',';
    out += format_double(rec.freeze_fraction);
    out += ',';
    out += std::to_string(rec.outcome.steps_taken);
    out += ',';
    out += format_double(rec.final_goal_distance);
    out += '\n';
  }
  return out;
}

std::vector<EpisodeRecord> parse_raw_csv(const std::string& text) {
  std::vector<EpisodeRecord> records;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("raw csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 9) throw ConfigError("raw csv: bad row '" + line + "'");
    EpisodeRecord rec;
    rec.method = fields[0];
    rec.n = static_cast<int>(parse_int(fields[1]));
    rec.sweep_seed = parse_u64(fields[2]);
    rec.episode_index = parse_int(fields[3]);
    if (fields[4] == "safe_success") {
      rec.outcome.kind = OutcomeKind::SafeSuccess;
    } else if (fields[4] == "unsafe_success") {
      rec.outcome.kind = OutcomeKind::UnsafeSuccess;
    } else if (fields[4] == "timeout") {
      rec.outcome.kind = OutcomeKind::Timeout;
    } else {
      throw ConfigError("raw csv: unknown outcome '" + fields[4] + "'");
    }
    rec.outcome.total_collision_steps = static_cast<int>(parse_int(fields[5]));
    rec.freeze_fraction = parse_double(fields[6]);
    rec.outcome.steps_taken = static_cast<int>(parse_int(fields[7]));
    rec.final_goal_distance = parse_double(fields[8]);
    records.push_back(std::move(rec));
  }
  return records;
}

std::string write_summary_csv(const MetricsSummary& summary) {
  std::string out =
      "method,N,safe_success_mean,safe_success_std,collisions_per_ep_mean,"
      "freezing_rate_mean,timeout_rate,n_episodes\n";
  for (const auto& row : summary.rows) {
    out += row.method;
    out += ',';
    out += std::to_string(row.n);
    out += ',';
    out += format_double(row.safe_success_mean);
    out += ',';
    out += format_double(row.safe_success_std);
    out += ',';
    out += format_double(row.collisions_per_episode_mean);
    out += ',';
    out += format_double(row.freezing_rate_mean);
    out += ',';
    out += format_double(row.timeout_mean);
    out += ',';
    out += std::to_string(row.episodes);
    out += '\n';
  }
  return out;
}

}  // namespace crowdnav
