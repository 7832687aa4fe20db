#pragma once

#include <cstdint>

#include "crowdnav/sim.hpp"
#include "crowdnav/world.hpp"

namespace crowdnav {

// Reward-shaping variants:
//   None      - extrinsic reward only (beta treated as 0)
//   PssOnly   - proxemic shaping without density-adaptive scaling (eta = 1)
//   PssSocial - full shaping with density-adaptive scaling
enum class ShapingMode { None, PssOnly, PssSocial };

const char* shaping_mode_name(ShapingMode mode);

struct ShapingConfig {
  double d_intimate = 0.45;      // m, intimate-zone threshold (Hall)
  double d_personal = 1.2;       // m, personal-zone threshold, > d_intimate
  double k_rep = 1.0;            // intimate penalty scale
  double sigma_intimate = 0.15;  // m, intimate penalty decay length
  double exp_clip = 10.0;        // symmetric clip on the exponent argument
  double kappa_personal = 0.5;   // 1/m, personal penalty slope
  double w_goal = 1.0;
  double w_intimate = 1.0;
  double w_personal = 0.5;
  double social_radius = 1.2;    // m, neighborhood for density scaling
  double gamma = 0.99;           // discount used by the shaping form
  double beta0 = 1.0;            // shaping weight at step 0
  double beta_final = 0.2;       // shaping weight after the anneal
  long long anneal_steps = 100000;
  ShapingMode mode = ShapingMode::PssSocial;
};

struct ExtrinsicConfig {
  double goal_reward = 10.0;
  double collision_penalty = -1.0;  // per colliding pedestrian per step
  double step_penalty = -0.01;
  double progress_weight = 1.0;     // per meter of goal progress
  // Weight on the squared command speed beyond v_max. Zero inside the
  // actuator disk, so preferences among realizable commands are untouched;
  // it only stops the unbounded action mean from saturating far outside the
  // clip region, where exploration noise ceases to change the realized
  // velocity.
  double overspeed_penalty = 1.0;
  double v_max = 1.0;  // must match SimConfig::v_max
};

// Intimate-zone penalty k_rep * exp(clip((d_I - d) / sigma_I)) for d < d_I.
// Throws std::domain_error outside the zone.
double phi_intimate(double d, const ShapingConfig& cfg);

// Personal-zone penalty kappa_P * (d_P - d) for d_I <= d < d_P.
// Throws std::domain_error outside the zone.
double phi_personal(double d, const ShapingConfig& cfg);

// Summed zone costs (C_I, C_P); each pedestrian contributes to at most one.
std::pair<double, double> zone_costs(const WorldState& world,
                                     const ShapingConfig& cfg);

// Density-adaptive scale 1/sqrt(max(1, n)): non-increasing, eta(0) = eta(1) = 1.
double eta(int neighbor_count);

// Potential Phi = -w_g * |p - g| - eta_t * (w_I * C_I + w_P * C_P), where
// eta_t is 1 unless the mode is PssSocial.
double potential(const WorldState& world, const ShapingConfig& cfg);

// Shaping reward gamma * Phi(next) - Phi(prev).
double pss_reward(double phi_prev, double phi_next, double gamma);

// Extrinsic navigation reward: sparse goal bonus, per-contact collision
// penalty, per-step cost, a dense progress term, and the overspeed penalty
// on the raw command.
double extrinsic_reward(const WorldState& prev, const WorldState& next,
                        const StepEvents& events, Vec2 action,
                        const ExtrinsicConfig& cfg);

// Linear anneal of the shaping weight from beta0 to beta_final over
// anneal_steps, constant afterward. Mode None pins beta to 0.
double beta_at(long long step, const ShapingConfig& cfg);

double total_reward(double extrinsic, double pss, double beta);

// Upper bound on |r_pss| for a given arena and maximum crowd size; the
// tracker asserts every emitted shaping reward stays under it.
double shaping_reward_bound(const ShapingConfig& cfg, const ArenaConfig& arena,
                            int max_pedestrians);

// Owns the previous potential for one episode stream. Reset on every episode
// boundary so no shaping reward ever crosses episodes.
class PotentialTracker {
 public:
  PotentialTracker(const ShapingConfig& cfg, const ArenaConfig& arena,
                   int max_pedestrians);

  void reset(const WorldState& world0);
  // Shaping reward for the transition into `next`; updates the stored
  // potential. Throws std::logic_error when the runtime bound is violated.
  double step_reward(const WorldState& next);

  double phi_prev() const { return phi_prev_; }

 private:
  ShapingConfig cfg_;
  double bound_;
  double phi_prev_ = 0.0;
};

}  // namespace crowdnav
