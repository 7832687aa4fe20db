#include "crowdnav/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crowdnav {

const char* shaping_mode_name(ShapingMode mode) {
  switch (mode) {
    case ShapingMode::None: return "none";
    case ShapingMode::PssOnly: return "pss_only";
    case ShapingMode::PssSocial: return "pss_social";
  }
  return "unknown";
}

double phi_intimate(double d, const ShapingConfig& cfg) {
  if (!(d >= 0.0 && d < cfg.d_intimate)) {
    throw std::domain_error("phi_intimate: d=" + std::to_string(d) +
                            " outside [0, " + std::to_string(cfg.d_intimate) +
                            ")");
  }
  const double arg = std::clamp((cfg.d_intimate - d) / cfg.sigma_intimate,
                                -cfg.exp_clip, cfg.exp_clip);
  return cfg.k_rep * std::exp(arg);
}

double phi_personal(double d, const ShapingConfig& cfg) {
  if (!(d >= cfg.d_intimate && d < cfg.d_personal)) {
    throw std::domain_error("phi_personal: d=" + std::to_string(d) +
                            " outside [" + std::to_string(cfg.d_intimate) +
                            ", " + std::to_string(cfg.d_personal) + ")");
  }
  return cfg.kappa_personal * (cfg.d_personal - d);
}

std::pair<double, double> zone_costs(const WorldState& world,
                                     const ShapingConfig& cfg) {
  double intimate = 0.0;
  double personal = 0.0;
  for (const auto& ped : world.pedestrians) {
    const double d = norm(ped.position - world.ego.position);
    if (d < cfg.d_intimate) {
      intimate += phi_intimate(d, cfg);
    } else if (d < cfg.d_personal) {
      personal += phi_personal(d, cfg);
    }
  }
  return {intimate, personal};
}

double eta(int neighbor_count) {
  return 1.0 / std::sqrt(static_cast<double>(std::max(1, neighbor_count)));
}

double potential(const WorldState& world, const ShapingConfig& cfg) {
  const auto [intimate, personal] = zone_costs(world, cfg);
  const double scale = cfg.mode == ShapingMode::PssSocial
                           ? eta(local_count(world, cfg.social_radius))
                           : 1.0;
  return -cfg.w_goal * norm(world.ego.position - world.ego.goal) -
         scale * (cfg.w_intimate * intimate + cfg.w_personal * personal);
}

double pss_reward(double phi_prev, double phi_next, double gamma) {
  return gamma * phi_next - phi_prev;
}

double extrinsic_reward(const WorldState& prev, const WorldState& next,
                        const StepEvents& events, Vec2 action,
                        const ExtrinsicConfig& cfg) {
  const double d_prev = norm(prev.ego.position - prev.ego.goal);
  const double d_next = norm(next.ego.position - next.ego.goal);
  double reward = cfg.step_penalty + cfg.progress_weight * (d_prev - d_next);
  reward += cfg.collision_penalty * static_cast<double>(events.collisions.size());
  if (events.ego_reached_goal) reward += cfg.goal_reward;
  const double excess = std::max(0.0, norm(action) - cfg.v_max);
  reward -= cfg.overspeed_penalty * excess * excess;
  return reward;
}

double beta_at(long long step, const ShapingConfig& cfg) {
  if (cfg.mode == ShapingMode::None) return 0.0;
  if (cfg.anneal_steps <= 0 || step >= cfg.anneal_steps) return cfg.beta_final;
  const double frac =
      static_cast<double>(step) / static_cast<double>(cfg.anneal_steps);
  return cfg.beta0 + (cfg.beta_final - cfg.beta0) * frac;
}

double total_reward(double extrinsic, double pss, double beta) {
  return extrinsic + beta * pss;
}

double shaping_reward_bound(const ShapingConfig& cfg, const ArenaConfig& arena,
                            int max_pedestrians) {
  const double k = static_cast<double>(max_pedestrians);
  return (cfg.gamma + 1.0) *
         (cfg.w_goal * arena.diagonal() +
          cfg.w_intimate * cfg.k_rep * std::exp(cfg.exp_clip) * k +
          cfg.w_personal * cfg.kappa_personal * cfg.d_personal * k);
}

PotentialTracker::PotentialTracker(const ShapingConfig& cfg,
                                   const ArenaConfig& arena,
                                   int max_pedestrians)
    : cfg_(cfg), bound_(shaping_reward_bound(cfg, arena, max_pedestrians)) {}

void PotentialTracker::reset(const WorldState& world0) {
  phi_prev_ = potential(world0, cfg_);
}

double PotentialTracker::step_reward(const WorldState& next) {
  const double phi_next = potential(next, cfg_);
  const double reward = pss_reward(phi_prev_, phi_next, cfg_.gamma);
  if (!(std::abs(reward) <= bound_)) {
    throw std::logic_error("shaping reward " + std::to_string(reward) +
                           " exceeds bound " + std::to_string(bound_));
  }
  phi_prev_ = phi_next;
  return reward;
}

}  // namespace crowdnav
