#pragma once

#include <array>
#include <span>
#include <vector>

#include "crowdnav/world.hpp"

namespace crowdnav {

// Fixed-dimension observation layout:
//   ego block (7): [v0 (2), p0 (2), goal direction (2), goal distance (1)]
//   knn block (4*k_max): distance-sorted neighbor slots of
//       [clipped relative position (2), clipped relative velocity (2)],
//       padded with a constant far-away sentinel beyond min(N, k_cap)
//   summary block (5 + j_nearest + #occupancy_radii): bounded crowd scalars
// The length never depends on the pedestrian count, and with k_cap below the
// minimum training crowd size the padded slots stay constant across the whole
// training distribution, which keeps running-statistics normalization stable
// when the crowd grows at test time.
struct EncoderConfig {
  int k_max = 16;   // slot budget
  int k_cap = 10;   // active-neighbor cap, <= k_max
  bool use_k_cap = true;    // ablation: off means fill up to k_max
  bool use_sorting = true;  // ablation: off means original list order
  double pos_clip = 3.0;    // m, per-axis bound on relative positions
  double vel_clip = 2.0;    // m/s, per-axis bound on relative velocities
  int j_nearest = 3;        // J smallest distances reported as inverses
  std::vector<double> occupancy_radii = {0.45, 1.2, 2.0};  // m, increasing
  double velocity_radius = 1.2;  // m, neighborhood for the mean relative velocity
  double social_eps = 0.01;      // epsilon guarding divisions
  double sigma_press = 0.8;      // m, crowd-pressure kernel length
  double pressure_clip = 5.0;    // bound on the log-scaled pressure
  double inv_dist_clip = 20.0;   // bound on inverse distances
  double occupancy_clip = 2.0;   // bound on occupancies and active fraction

  std::array<double, 4> pad_sentinel() const {
    return {pos_clip, pos_clip, 0.0, 0.0};
  }
  int summary_dim() const {
    return 5 + j_nearest + static_cast<int>(occupancy_radii.size());
  }
  int observation_dim() const { return 7 + 4 * k_max + summary_dim(); }
  int knn_offset() const { return 7; }
  int summary_offset() const { return 7 + 4 * k_max; }
};

using Observation = std::vector<double>;

// Ego block (7 values).
std::array<double, 7> encode_ego(const WorldState& world,
                                 const EncoderConfig& cfg);

// Pedestrian indices ordered by non-decreasing distance to the ego; ties keep
// the original index order (stable sort), so the permutation is deterministic.
std::vector<int> sort_neighbors(const WorldState& world);

// Neighbor slots (4*k_max values).
std::vector<double> encode_knn(const WorldState& world,
                               const EncoderConfig& cfg);

// Crowd pressure proxy: P = log-scaled magnitude of the aggregated repulsive
// interaction vector, A = cosine alignment of that vector with the ego
// velocity (0 when either is near zero).
std::pair<double, double> crowd_pressure(const WorldState& world,
                                         const EncoderConfig& cfg);

// Summary block (5 + J + L values).
std::vector<double> encode_summary(const WorldState& world,
                                   const EncoderConfig& cfg);

// Full observation [ego; knn; summary].
Observation encode(const WorldState& world, const EncoderConfig& cfg);

// Streaming per-component mean/variance with an exact parallel merge
// (Welford update, Chan et al. combine). normalize() never mutates, so
// frozen evaluation simply stops calling update()/merge().
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  RunningNormalizer(int dim, double clip_bound, double epsilon);

  void update(std::span<const double> obs);
  void merge(const RunningNormalizer& other);
  // (obs - mean) / sqrt(variance + epsilon), clipped to +-clip_bound.
  // Requires at least one recorded observation.
  Observation normalize(std::span<const double> obs) const;

  double count() const { return count_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  double clip_bound() const { return clip_bound_; }
  double epsilon() const { return epsilon_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& m2() const { return m2_; }
  std::vector<double> variance() const;

  // Restores a normalizer from serialized state.
  static RunningNormalizer restore(double count, std::vector<double> mean,
                                   std::vector<double> m2, double clip_bound,
                                   double epsilon);

 private:
  double count_ = 0.0;
  std::vector<double> mean_;
  std::vector<double> m2_;  // sum of squared deviations from the mean
  double clip_bound_ = 10.0;
  double epsilon_ = 1e-8;
};

}  // namespace crowdnav
