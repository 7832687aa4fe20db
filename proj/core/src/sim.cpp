#include "crowdnav/sim.hpp"

#include <cassert>
#include <string>

#include "crowdnav/errors.hpp"
#include "crowdnav/peds.hpp"

namespace crowdnav {

const char* outcome_name(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::SafeSuccess: return "safe_success";
    case OutcomeKind::UnsafeSuccess: return "unsafe_success";
    case OutcomeKind::Timeout: return "timeout";
  }
  return "unknown";
}

std::vector<int> detect_collisions(const WorldState& world) {
  std::vector<int> hits;
  for (int i = 0; i < static_cast<int>(world.pedestrians.size()); ++i) {
    const auto& ped = world.pedestrians[static_cast<std::size_t>(i)];
    if (norm(ped.position - world.ego.position) <
        ped.radius + world.ego.radius) {
      hits.push_back(i);
    }
  }
  return hits;
}

std::optional<Outcome> check_termination(const WorldState& world,
                                         int collision_steps_so_far,
                                         double goal_tolerance) {
  if (norm(world.ego.position - world.ego.goal) < goal_tolerance) {
    return Outcome{collision_steps_so_far == 0 ? OutcomeKind::SafeSuccess
                                               : OutcomeKind::UnsafeSuccess,
                   collision_steps_so_far, world.step_index};
  }
  if (world.step_index >= world.context.horizon) {
    return Outcome{OutcomeKind::Timeout, collision_steps_so_far,
                   world.step_index};
  }
  return std::nullopt;
}

Engine::Engine(WorldState world, const ArenaConfig& arena,
               const ScenarioConfig& scenario, const SimConfig& sim)
    : world_(std::move(world)),
      arena_(arena),
      scenario_(scenario),
      sim_(sim),
      respawn_rng_(derive_stream(world_.context.seed, kStreamRespawn)) {
  assert(static_cast<int>(world_.pedestrians.size()) ==
         world_.context.pedestrian_count);
}

std::vector<Vec2> Engine::pedestrian_commands() {
  // Respawn goals first so no controller ever sees an at-goal pedestrian.
  for (auto& ped : world_.pedestrians) {
    if (norm(ped.position - ped.goal) >= sim_.goal_tolerance) continue;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= scenario_.max_place_attempts) {
        throw PlacementFailure("pedestrian goal respawn exhausted attempts");
      }
      const Vec2 candidate = {
          respawn_rng_.uniform(ped.radius, arena_.width - ped.radius),
          respawn_rng_.uniform(ped.radius, arena_.height - ped.radius)};
      if (norm(candidate - ped.position) >= scenario_.min_goal_dist) {
        ped.goal = candidate;
        break;
      }
    }
  }

  std::vector<Vec2> commands;
  commands.reserve(world_.pedestrians.size());
  for (int i = 0; i < static_cast<int>(world_.pedestrians.size()); ++i) {
    Vec2 v;
    switch (world_.context.controller) {
      case PedController::Orca:
        v = orca_velocity(i + 1, world_, world_.context.params.orca, sim_.dt);
        break;
      case PedController::Sfm:
        v = sfm_velocity(i + 1, world_, world_.context.params.sfm, sim_.dt);
        break;
    }
    commands.push_back(clamp_norm(v, sim_.ped_v_max));
  }
  return commands;
}

StepEvents Engine::step(const EgoAction& action) {
  if (outcome_.has_value()) {
    throw EpisodeFinished("Engine::step after termination at step " +
                          std::to_string(world_.step_index));
  }
  assert(is_finite(action.command_velocity));

  // Pedestrian controllers read the pre-step state; all agents then move
  // simultaneously.
  const std::vector<Vec2> ped_commands = pedestrian_commands();

  world_.ego.velocity = clamp_norm(action.command_velocity, sim_.v_max);
  world_.ego.position = clamp_to_arena(
      world_.ego.position + world_.ego.velocity * sim_.dt, arena_,
      world_.ego.radius);

  for (std::size_t i = 0; i < world_.pedestrians.size(); ++i) {
    auto& ped = world_.pedestrians[i];
    ped.velocity = ped_commands[i];
    ped.position = clamp_to_arena(ped.position + ped.velocity * sim_.dt,
                                  arena_, ped.radius);
  }

  ++world_.step_index;

  StepEvents events;
  events.collisions = detect_collisions(world_);
  events.ego_reached_goal =
      norm(world_.ego.position - world_.ego.goal) < sim_.goal_tolerance;
  events.ego_frozen = norm(world_.ego.velocity) < sim_.freeze_speed;

  total_collision_steps_ += static_cast<int>(events.collisions.size());
  outcome_ =
      check_termination(world_, total_collision_steps_, sim_.goal_tolerance);
  return events;
}

}  // namespace crowdnav
