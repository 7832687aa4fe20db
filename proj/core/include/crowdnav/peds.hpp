#pragma once

#include <vector>

#include "crowdnav/controller_params.hpp"
#include "crowdnav/vec2.hpp"
#include "crowdnav/world.hpp"

namespace crowdnav {

// Linear velocity constraint: v is admissible iff dot(v - point, normal) >= 0.
// The normal is unit length and points into the permitted half-plane.
struct HalfPlane {
  Vec2 point;
  Vec2 normal;
};

// Reciprocal-avoidance constraint between `self` and `other` over the
// time horizon in `params`. Each agent takes half the responsibility for
// resolving the conflict, so the constraint line passes through
// self.velocity + u/2 where u is the smallest change of the relative
// velocity that exits the truncated velocity obstacle. Agents that already
// overlap use dt (not the horizon) as the escape time, which demands
// separation within one step. A fully degenerate pair (identical position
// and velocity) falls back to a fixed +x separating direction so the result
// stays deterministic.
HalfPlane orca_halfplane(const AgentState& self, const AgentState& other,
                         const OrcaParams& params, double dt);

// Velocity closest to `preferred` satisfying every half-plane and the speed
// disk |v| <= max_speed. When the constraint set is infeasible, falls back to
// the program that minimizes the largest constraint violation while staying
// on the speed disk (the standard two-stage treatment).
Vec2 solve_lp2(const std::vector<HalfPlane>& constraints, Vec2 preferred,
               double max_speed);

// Full controller for agent `agent_index` (0 = ego, i >= 1 = pedestrian i-1):
// preferred velocity toward the agent's goal, constraints from the nearest
// `max_neighbors` agents within `neighbor_dist`, solved by solve_lp2.
// Pure function of (world, params, dt).
Vec2 orca_velocity(int agent_index, const WorldState& world,
                   const OrcaParams& params, double dt);

// Social-force controller: relaxation toward the goal-directed desired
// velocity plus exponential repulsion from every other agent, integrated for
// one step and capped at desired_speed. Pure function of (world, params, dt).
Vec2 sfm_velocity(int agent_index, const WorldState& world,
                  const SfmParams& params, double dt);

}  // namespace crowdnav
