#include "crowdnav/encoder.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

#include "crowdnav/errors.hpp"

namespace crowdnav {

namespace {

double clip(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

std::vector<double> ego_distances(const WorldState& world) {
  std::vector<double> d;
  d.reserve(world.pedestrians.size());
  for (const auto& ped : world.pedestrians) {
    d.push_back(norm(ped.position - world.ego.position));
  }
  return d;
}

}  // namespace

std::array<double, 7> encode_ego(const WorldState& world,
                                 const EncoderConfig& cfg) {
  const Vec2 to_goal = world.ego.goal - world.ego.position;
  const double goal_dist = norm(to_goal);
  const Vec2 dir = to_goal / std::max(goal_dist, cfg.social_eps);
  return {world.ego.velocity.x, world.ego.velocity.y,
          world.ego.position.x, world.ego.position.y,
          dir.x, dir.y, goal_dist};
}

std::vector<int> sort_neighbors(const WorldState& world) {
  const std::vector<double> d = ego_distances(world);
  std::vector<int> order(world.pedestrians.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)];
  });
  return order;
}

std::vector<double> encode_knn(const WorldState& world,
                               const EncoderConfig& cfg) {
  const int n = static_cast<int>(world.pedestrians.size());
  const int cap = cfg.use_k_cap ? std::min(cfg.k_cap, cfg.k_max) : cfg.k_max;
  const int filled = std::min(n, cap);

  std::vector<int> order;
  if (cfg.use_sorting) {
    order = sort_neighbors(world);
  } else {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
  }

  const std::array<double, 4> pad = cfg.pad_sentinel();
  std::vector<double> out(static_cast<std::size_t>(4 * cfg.k_max));
  for (int k = 0; k < cfg.k_max; ++k) {
    double* slot = out.data() + 4 * k;
    if (k < filled) {
      const auto& ped =
          world.pedestrians[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
      const Vec2 dp = ped.position - world.ego.position;
      const Vec2 dv = ped.velocity - world.ego.velocity;
      slot[0] = clip(dp.x, -cfg.pos_clip, cfg.pos_clip);
      slot[1] = clip(dp.y, -cfg.pos_clip, cfg.pos_clip);
      slot[2] = clip(dv.x, -cfg.vel_clip, cfg.vel_clip);
      slot[3] = clip(dv.y, -cfg.vel_clip, cfg.vel_clip);
    } else {
      slot[0] = pad[0];
      slot[1] = pad[1];
      slot[2] = pad[2];
      slot[3] = pad[3];
    }
  }
  return out;
}

std::pair<double, double> crowd_pressure(const WorldState& world,
                                         const EncoderConfig& cfg) {
  // Accumulate in distance order so the sum (and therefore the whole
  // observation) is bit-identical under any pedestrian list permutation.
  Vec2 repulsion{0.0, 0.0};
  for (const int i : sort_neighbors(world)) {
    const auto& ped = world.pedestrians[static_cast<std::size_t>(i)];
    const Vec2 dp = ped.position - world.ego.position;
    const double d = norm(dp);
    repulsion += std::exp(-d / cfg.sigma_press) *
                 (-dp / std::max(d, cfg.social_eps));
  }
  const double magnitude = norm(repulsion);
  const double pressure =
      clip(std::log1p(magnitude), 0.0, cfg.pressure_clip);

  const double speed = norm(world.ego.velocity);
  double alignment = 0.0;
  if (magnitude > 1e-9 && speed > 1e-9) {
    alignment =
        clip(dot(repulsion, world.ego.velocity) / (magnitude * speed), -1.0, 1.0);
  }
  return {pressure, alignment};
}

std::vector<double> encode_summary(const WorldState& world,
                                   const EncoderConfig& cfg) {
  const int n = static_cast<int>(world.pedestrians.size());
  std::vector<double> distances = ego_distances(world);
  std::sort(distances.begin(), distances.end());

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.summary_dim()));

  const auto [pressure, alignment] = crowd_pressure(world, cfg);
  out.push_back(pressure);
  out.push_back(alignment);

  // Inverses of the J smallest distances, zero-filled past the crowd size.
  for (int j = 0; j < cfg.j_nearest; ++j) {
    if (j < n) {
      out.push_back(clip(1.0 / (distances[static_cast<std::size_t>(j)] +
                                cfg.social_eps),
                         0.0, cfg.inv_dist_clip));
    } else {
      out.push_back(0.0);
    }
  }

  // Occupancy of each proxemic radius, normalized by the slot budget.
  for (const double r : cfg.occupancy_radii) {
    int count = 0;
    for (const double d : distances) {
      if (d <= r) ++count;
    }
    out.push_back(clip(static_cast<double>(count) / cfg.k_max, 0.0,
                       cfg.occupancy_clip));
  }

  out.push_back(clip(static_cast<double>(n) / cfg.k_max, 0.0,
                     cfg.occupancy_clip));

  // Mean relative velocity of neighbors inside the velocity radius, summed in
  // distance order for permutation-stable rounding.
  Vec2 mean_dv{0.0, 0.0};
  int in_radius = 0;
  for (const int i : sort_neighbors(world)) {
    const auto& ped = world.pedestrians[static_cast<std::size_t>(i)];
    if (norm(ped.position - world.ego.position) <= cfg.velocity_radius) {
      mean_dv += ped.velocity - world.ego.velocity;
      ++in_radius;
    }
  }
  mean_dv = mean_dv / std::max(1, in_radius);
  out.push_back(clip(mean_dv.x, -cfg.vel_clip, cfg.vel_clip));
  out.push_back(clip(mean_dv.y, -cfg.vel_clip, cfg.vel_clip));

  return out;
}

Observation encode(const WorldState& world, const EncoderConfig& cfg) {
  Observation obs;
  obs.reserve(static_cast<std::size_t>(cfg.observation_dim()));
  const auto ego = encode_ego(world, cfg);
  obs.insert(obs.end(), ego.begin(), ego.end());
  const auto knn = encode_knn(world, cfg);
  obs.insert(obs.end(), knn.begin(), knn.end());
  const auto summary = encode_summary(world, cfg);
  obs.insert(obs.end(), summary.begin(), summary.end());
  return obs;
}

RunningNormalizer::RunningNormalizer(int dim, double clip_bound, double epsilon)
    : mean_(static_cast<std::size_t>(dim), 0.0),
      m2_(static_cast<std::size_t>(dim), 0.0),
      clip_bound_(clip_bound),
      epsilon_(epsilon) {}

void RunningNormalizer::update(std::span<const double> obs) {
  if (obs.size() != mean_.size()) {
    throw DimensionMismatch("RunningNormalizer::update: got " +
                            std::to_string(obs.size()) + " values, expected " +
                            std::to_string(mean_.size()));
  }
  count_ += 1.0;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = obs[i] - mean_[i];
    mean_[i] += delta / count_;
    m2_[i] += delta * (obs[i] - mean_[i]);
  }
}

void RunningNormalizer::merge(const RunningNormalizer& other) {
  if (other.mean_.size() != mean_.size()) {
    throw DimensionMismatch("RunningNormalizer::merge: dimension mismatch");
  }
  if (other.count_ == 0.0) return;
  if (count_ == 0.0) {
    *this = other;
    return;
  }
  const double total = count_ + other.count_;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    m2_[i] += other.m2_[i] + delta * delta * count_ * other.count_ / total;
    mean_[i] += delta * other.count_ / total;
  }
  count_ = total;
}

Observation RunningNormalizer::normalize(std::span<const double> obs) const {
  if (obs.size() != mean_.size()) {
    throw DimensionMismatch("RunningNormalizer::normalize: got " +
                            std::to_string(obs.size()) +
                            " values, expected " + std::to_string(mean_.size()));
  }
  if (count_ < 1.0) {
    throw std::logic_error("RunningNormalizer::normalize before any update");
  }
  Observation out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double variance = m2_[i] / count_;
    const double z = (obs[i] - mean_[i]) / std::sqrt(variance + epsilon_);
    out[i] = std::clamp(z, -clip_bound_, clip_bound_);
  }
  return out;
}

std::vector<double> RunningNormalizer::variance() const {
  std::vector<double> v(mean_.size(), 0.0);
  if (count_ > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m2_[i] / count_;
  }
  return v;
}

RunningNormalizer RunningNormalizer::restore(double count,
                                             std::vector<double> mean,
                                             std::vector<double> m2,
                                             double clip_bound,
                                             double epsilon) {
  if (mean.size() != m2.size()) {
    throw DimensionMismatch("RunningNormalizer::restore: mean/m2 mismatch");
  }
  RunningNormalizer norm(static_cast<int>(mean.size()), clip_bound, epsilon);
  norm.count_ = count;
  norm.mean_ = std::move(mean);
  norm.m2_ = std::move(m2);
  return norm;
}

}  // namespace crowdnav
