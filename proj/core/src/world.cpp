#include "crowdnav/world.hpp"

#include <cassert>
#include <string>

#include "crowdnav/errors.hpp"
#include "crowdnav/rng.hpp"

namespace crowdnav {

double ArenaConfig::diagonal() const { return norm(Vec2{width, height}); }

double density(int pedestrian_count, const ArenaConfig& arena) {
  assert(pedestrian_count >= 0);
  assert(arena.area() > 0.0);
  return static_cast<double>(pedestrian_count) / arena.area();
}

int local_count(const WorldState& world, double r) {
  assert(r > 0.0);
  int count = 0;
  for (const auto& ped : world.pedestrians) {
    if (norm(ped.position - world.ego.position) <= r) ++count;
  }
  return count;
}

Vec2 clamp_to_arena(Vec2 position, const ArenaConfig& arena, double radius) {
  const auto clamp = [](double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
  };
  return {clamp(position.x, radius, arena.width - radius),
          clamp(position.y, radius, arena.height - radius)};
}

namespace {

Vec2 sample_point(SplitMix64& rng, const ArenaConfig& arena, double radius) {
  return {rng.uniform(radius, arena.width - radius),
          rng.uniform(radius, arena.height - radius)};
}

}  // namespace

WorldState sample_episode(const ArenaConfig& arena, int n_min, int n_max,
                          std::uint64_t seed, PedController controller,
                          const ControllerParams& params,
                          const ScenarioConfig& scenario) {
  assert(n_min >= 0 && n_min <= n_max);
  assert(arena.width > 0.0 && arena.height > 0.0);

  SplitMix64 rng(derive_stream(seed, kStreamScenario));
  const int n = rng.uniform_int(n_min, n_max);

  WorldState world;
  world.context.pedestrian_count = n;
  world.context.horizon = scenario.horizon;
  world.context.seed = seed;
  world.context.controller = controller;
  world.context.params = params;

  // Positions: sequential rejection sampling against already-placed agents.
  // The attempt budget is shared across the whole call so a pathological
  // packing fails fast instead of spinning.
  int attempts = 0;
  const auto place = [&](double radius, const std::vector<AgentState>& placed,
                         const AgentState* ego) -> Vec2 {
    for (;;) {
      if (++attempts > scenario.max_place_attempts) {
        throw PlacementFailure("sample_episode: could not place " +
                               std::to_string(n + 1) + " agents in " +
                               std::to_string(arena.width) + "x" +
                               std::to_string(arena.height) + " arena after " +
                               std::to_string(scenario.max_place_attempts) +
                               " attempts");
      }
      const Vec2 candidate = sample_point(rng, arena, radius);
      bool ok = true;
      if (ego != nullptr &&
          norm(candidate - ego->position) <=
              radius + ego->radius + scenario.clearance) {
        ok = false;
      }
      for (const auto& other : placed) {
        if (!ok) break;
        if (norm(candidate - other.position) <=
            radius + other.radius + scenario.clearance) {
          ok = false;
        }
      }
      if (ok) return candidate;
    }
  };

  world.ego.radius = scenario.ego_radius;
  world.ego.position = place(scenario.ego_radius, {}, nullptr);
  world.ego.velocity = {0.0, 0.0};

  world.pedestrians.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    AgentState ped;
    ped.radius = scenario.ped_radius;
    ped.position = place(scenario.ped_radius, world.pedestrians, &world.ego);
    ped.velocity = {0.0, 0.0};
    world.pedestrians.push_back(ped);
  }

  // Goals: uniform in the radius-inset box, at least min_goal_dist from the
  // agent's start. The inset keeps every goal reachable within the
  // goal tolerance despite wall clamping.
  const auto draw_goal = [&](const AgentState& agent) -> Vec2 {
    for (;;) {
      if (++attempts > scenario.max_place_attempts) {
        throw PlacementFailure("sample_episode: could not draw a goal at least " +
                               std::to_string(scenario.min_goal_dist) +
                               " m from the start");
      }
      const Vec2 candidate = sample_point(rng, arena, agent.radius);
      if (norm(candidate - agent.position) >= scenario.min_goal_dist) {
        return candidate;
      }
    }
  };

  world.ego.goal = draw_goal(world.ego);
  for (auto& ped : world.pedestrians) ped.goal = draw_goal(ped);

  return world;
}

}  // namespace crowdnav
