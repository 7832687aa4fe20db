#pragma once

#include <cstdint>
#include <vector>

#include "crowdnav/controller_params.hpp"
#include "crowdnav/vec2.hpp"

namespace crowdnav {

struct AgentState {
  Vec2 position;       // m
  Vec2 velocity;       // m/s
  double radius = 0.15;  // m, > 0
  Vec2 goal;           // m
};

struct ArenaConfig {
  double width = 3.0;   // m
  double height = 3.0;  // m

  double area() const { return width * height; }
  double diagonal() const;
};

// Scenario-generation knobs: the physical details behind "random
// non-overlapping starts with random goals".
struct ScenarioConfig {
  double ego_radius = 0.15;      // m
  double ped_radius = 0.15;      // m
  double clearance = 0.05;       // m beyond touching required at spawn
  double min_goal_dist = 1.0;    // m between an agent's start and its goal
  int max_place_attempts = 10000;
  int horizon = 100;             // episode length in steps
};

// Episode parameters that stay fixed for a whole episode.
struct EpisodeContext {
  int pedestrian_count = 0;
  int horizon = 100;
  std::uint64_t seed = 0;
  PedController controller = PedController::Sfm;
  ControllerParams params;
};

struct WorldState {
  AgentState ego;
  std::vector<AgentState> pedestrians;  // length == context.pedestrian_count
  int step_index = 0;                   // <= context.horizon
  EpisodeContext context;

  const AgentState& agent(int index) const {
    return index == 0 ? ego : pedestrians[static_cast<std::size_t>(index - 1)];
  }
  int agent_count() const { return 1 + static_cast<int>(pedestrians.size()); }
};

// Episode-level crowd density in pedestrians per square meter.
double density(int pedestrian_count, const ArenaConfig& arena);

// Number of pedestrians within the closed ball of radius r around the ego.
int local_count(const WorldState& world, double r);

// Clamps an agent center so its disk stays inside the arena.
Vec2 clamp_to_arena(Vec2 position, const ArenaConfig& arena, double radius);

// Seeded scenario generator. Draws N uniformly from [n_min, n_max], places
// the ego and all pedestrians at non-overlapping random positions (pairwise
// clearance beyond touching) and assigns each agent a uniform random goal at
// least min_goal_dist away from its start. Pure function of its arguments:
// identical inputs produce identical WorldState.
//
// Throws PlacementFailure when the rejection-sampling attempt budget is
// exhausted (over-packed configuration).
WorldState sample_episode(const ArenaConfig& arena, int n_min, int n_max,
                          std::uint64_t seed, PedController controller,
                          const ControllerParams& params = {},
                          const ScenarioConfig& scenario = {});

}  // namespace crowdnav
