#include "crowdnav/peds.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace crowdnav {

namespace {

constexpr double kEps = 1e-9;

// Boundary direction of a half-plane; the permitted side is the ccw-left of it.
Vec2 boundary_dir(const HalfPlane& h) { return {h.normal.y, -h.normal.x}; }

// Optimizes along the boundary line of constraint `index`, subject to the
// earlier constraints and the speed disk. Returns false when that line has
// no feasible segment. With direction_opt the objective is max dot(opt, v),
// otherwise min |v - opt|.
bool lp1(const std::vector<HalfPlane>& constraints, std::size_t index,
         double radius, Vec2 opt, bool direction_opt, Vec2& result) {
  const Vec2 point = constraints[index].point;
  const Vec2 dir = boundary_dir(constraints[index]);

  const double dot_pd = dot(point, dir);
  const double discriminant = dot_pd * dot_pd + radius * radius - norm_sq(point);
  if (discriminant < 0.0) return false;  // line misses the speed disk

  const double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dot_pd - sqrt_disc;
  double t_right = -dot_pd + sqrt_disc;

  for (std::size_t j = 0; j < index; ++j) {
    const double denom = dot(dir, constraints[j].normal);
    const double num = dot(point - constraints[j].point, constraints[j].normal);
    if (std::abs(denom) <= kEps) {
      if (num < 0.0) return false;  // parallel and fully on the wrong side
      continue;
    }
    const double t = -num / denom;
    if (denom > 0.0) {
      t_left = std::max(t_left, t);
    } else {
      t_right = std::min(t_right, t);
    }
    if (t_left > t_right) return false;
  }

  double t;
  if (direction_opt) {
    t = dot(opt, dir) > 0.0 ? t_right : t_left;
  } else {
    t = std::clamp(dot(opt - point, dir), t_left, t_right);
  }
  result = point + t * dir;
  return true;
}

// Incremental 2D LP over the half-planes and the speed disk. Returns the
// index of the first constraint that makes the program infeasible, or
// constraints.size() on success. On failure `result` holds the best velocity
// for the constraints processed so far.
std::size_t lp2(const std::vector<HalfPlane>& constraints, double radius,
                Vec2 opt, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = opt * radius;  // opt is a unit direction
  } else if (norm_sq(opt) > radius * radius) {
    result = normalized_or(opt, {1.0, 0.0}) * radius;
  } else {
    result = opt;
  }

  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (dot(result - constraints[i].point, constraints[i].normal) < 0.0) {
      const Vec2 temp = result;
      if (!lp1(constraints, i, radius, opt, direction_opt, result)) {
        result = temp;
        return i;
      }
    }
  }
  return constraints.size();
}

// Back-up program for the infeasible case: starting from the first failed
// constraint, walk the remaining constraints and keep the velocity that
// minimizes the largest violation. Each step projects the already-processed
// constraints onto the bisecting lines and re-solves with a directional
// objective (the 3D LP of the original formulation, projected to 2D).
void lp3(const std::vector<HalfPlane>& constraints, std::size_t begin,
         double radius, Vec2& result) {
  double distance = 0.0;
  for (std::size_t i = begin; i < constraints.size(); ++i) {
    const double violation =
        dot(constraints[i].point - result, constraints[i].normal);
    if (violation <= distance) continue;

    std::vector<HalfPlane> projected;
    projected.reserve(i);
    const Vec2 dir_i = boundary_dir(constraints[i]);
    for (std::size_t j = 0; j < i; ++j) {
      const Vec2 dir_j = boundary_dir(constraints[j]);
      const double determinant = det(dir_i, dir_j);
      HalfPlane line;
      if (std::abs(determinant) <= kEps) {
        if (dot(constraints[i].normal, constraints[j].normal) > 0.0) {
          continue;  // same orientation: j is redundant with i here
        }
        line.point = 0.5 * (constraints[i].point + constraints[j].point);
      } else {
        line.point =
            constraints[i].point +
            (det(dir_j, constraints[i].point - constraints[j].point) /
             determinant) *
                dir_i;
      }
      line.normal = perp_ccw(normalized_or(dir_j - dir_i, {1.0, 0.0}));
      projected.push_back(line);
    }

    const Vec2 temp = result;
    if (lp2(projected, radius, constraints[i].normal, true, result) <
        projected.size()) {
      // This should not happen by construction; keep the previous result.
      result = temp;
    }
    distance = dot(constraints[i].point - result, constraints[i].normal);
  }
}

}  // namespace

HalfPlane orca_halfplane(const AgentState& self, const AgentState& other,
                         const OrcaParams& params, double dt) {
  const Vec2 relative_position = other.position - self.position;
  const Vec2 relative_velocity = self.velocity - other.velocity;
  const double dist_sq = norm_sq(relative_position);
  const double combined_radius = self.radius + other.radius;
  const double combined_radius_sq = combined_radius * combined_radius;

  Vec2 direction;  // boundary direction; permitted side is its ccw-left
  Vec2 u;          // smallest change moving the relative velocity out of the VO

  if (dist_sq > combined_radius_sq) {
    const Vec2 w = relative_velocity - relative_position / params.time_horizon;
    const double w_len_sq = norm_sq(w);
    const double dot1 = dot(w, relative_position);
    if (dot1 < 0.0 && dot1 * dot1 > combined_radius_sq * w_len_sq) {
      // Nearest exit is through the cut-off arc of the truncated cone.
      const double w_len = std::sqrt(w_len_sq);
      const Vec2 unit_w = w / w_len;
      direction = {unit_w.y, -unit_w.x};
      u = (combined_radius / params.time_horizon - w_len) * unit_w;
    } else {
      // Nearest exit is through one of the legs.
      const double leg = std::sqrt(dist_sq - combined_radius_sq);
      if (det(relative_position, w) > 0.0) {
        direction = Vec2{relative_position.x * leg -
                             relative_position.y * combined_radius,
                         relative_position.x * combined_radius +
                             relative_position.y * leg} /
                    dist_sq;
      } else {
        direction = -Vec2{relative_position.x * leg +
                              relative_position.y * combined_radius,
                          -relative_position.x * combined_radius +
                              relative_position.y * leg} /
                    dist_sq;
      }
      u = dot(relative_velocity, direction) * direction - relative_velocity;
    }
  } else {
    // Already overlapping: demand separation within one time step.
    const double inv_dt = 1.0 / dt;
    const Vec2 w = relative_velocity - relative_position * inv_dt;
    const double w_len = norm(w);
    // w vanishes only for a fully degenerate pair (same position, same
    // velocity); any fixed direction keeps the result deterministic.
    const Vec2 unit_w = w_len < 1e-12 ? Vec2{1.0, 0.0} : w / w_len;
    direction = {unit_w.y, -unit_w.x};
    u = (combined_radius * inv_dt - w_len) * unit_w;
  }

  return HalfPlane{self.velocity + 0.5 * u, perp_ccw(direction)};
}

Vec2 solve_lp2(const std::vector<HalfPlane>& constraints, Vec2 preferred,
               double max_speed) {
  Vec2 result;
  const std::size_t fail = lp2(constraints, max_speed, preferred, false, result);
  if (fail < constraints.size()) {
    lp3(constraints, fail, max_speed, result);
  }
  return result;
}

Vec2 orca_velocity(int agent_index, const WorldState& world,
                   const OrcaParams& params, double dt) {
  const AgentState& self = world.agent(agent_index);

  const Vec2 to_goal = self.goal - self.position;
  const double goal_dist = norm(to_goal);
  Vec2 preferred{0.0, 0.0};
  if (goal_dist > 1e-12) {
    // Slow down on final approach so the agent can stop on the goal.
    const double speed = std::min(params.max_speed, goal_dist / dt);
    preferred = to_goal * (speed / goal_dist);
  }
  // Fixed tiny rotation: breaks exactly head-on symmetric encounters the same
  // way for everyone, so paired agents sidestep with a common handedness.
  preferred = rotated(preferred, 1e-4);

  std::vector<std::pair<double, int>> near;  // (squared distance, agent index)
  for (int j = 0; j < world.agent_count(); ++j) {
    if (j == agent_index) continue;
    const double d2 = norm_sq(world.agent(j).position - self.position);
    if (d2 < params.neighbor_dist * params.neighbor_dist) {
      near.emplace_back(d2, j);
    }
  }
  std::sort(near.begin(), near.end());
  if (static_cast<int>(near.size()) > params.max_neighbors) {
    near.resize(static_cast<std::size_t>(params.max_neighbors));
  }

  std::vector<HalfPlane> constraints;
  constraints.reserve(near.size());
  for (const auto& [d2, j] : near) {
    constraints.push_back(orca_halfplane(self, world.agent(j), params, dt));
  }
  return solve_lp2(constraints, preferred, params.max_speed);
}

Vec2 sfm_velocity(int agent_index, const WorldState& world,
                  const SfmParams& params, double dt) {
  const AgentState& self = world.agent(agent_index);

  const Vec2 to_goal = self.goal - self.position;
  const double goal_dist = norm(to_goal);
  Vec2 desired{0.0, 0.0};
  if (goal_dist > 1e-12) {
    desired = to_goal * (params.desired_speed / goal_dist);
  }

  Vec2 force = (desired - self.velocity) / params.relaxation_time;
  for (int j = 0; j < world.agent_count(); ++j) {
    if (j == agent_index) continue;
    const AgentState& other = world.agent(j);
    const Vec2 offset = self.position - other.position;  // from j to self
    const double d = norm(offset);
    const double radii_sum = self.radius + other.radius;
    const Vec2 away = d < 1e-12 ? Vec2{1.0, 0.0} : offset / d;
    force += params.strength_a * std::exp((radii_sum - d) / params.range_b) * away;
  }

  return clamp_norm(self.velocity + force * dt, params.desired_speed);
}

}  // namespace crowdnav
