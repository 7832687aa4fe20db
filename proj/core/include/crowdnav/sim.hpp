#pragma once

#include <optional>
#include <vector>

#include "crowdnav/rng.hpp"
#include "crowdnav/vec2.hpp"
#include "crowdnav/world.hpp"

namespace crowdnav {

struct SimConfig {
  double dt = 0.1;             // s
  double v_max = 1.0;          // m/s, ego speed cap
  double ped_v_max = 1.0;      // m/s, pedestrian speed cap
  double goal_tolerance = 0.2; // m
  double freeze_speed = 0.05;  // m/s, below this the ego counts as frozen
};

// Holonomic velocity command; the engine clips it to the speed cap.
struct EgoAction {
  Vec2 command_velocity;
};

struct StepEvents {
  std::vector<int> collisions;   // pedestrian indices in contact this step
  bool ego_reached_goal = false;
  bool ego_frozen = false;
};

enum class OutcomeKind { SafeSuccess, UnsafeSuccess, Timeout };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Timeout;
  // Summed per-step contact count: a pedestrian in contact for three steps
  // contributes three, two pedestrians in contact on one step contribute two.
  int total_collision_steps = 0;
  int steps_taken = 0;
};

const char* outcome_name(OutcomeKind kind);

// Pedestrian indices i with |p_i - p_ego| strictly below the radii sum.
// Touching exactly is not a collision.
std::vector<int> detect_collisions(const WorldState& world);

// Goal arrival ends the episode (safe iff no contact happened so far);
// reaching the horizon ends it as Timeout. Collisions never terminate —
// episodes may accumulate several contacts and still succeed (unsafely).
std::optional<Outcome> check_termination(const WorldState& world,
                                         int collision_steps_so_far,
                                         double goal_tolerance);

// Episode engine. Owns the world, the pedestrian-goal respawn stream, and the
// cumulative event counters. Single-threaded per instance; independent
// instances can run on different threads since they share nothing.
class Engine {
 public:
  Engine(WorldState world, const ArenaConfig& arena,
         const ScenarioConfig& scenario, const SimConfig& sim);

  const WorldState& world() const { return world_; }
  const SimConfig& sim_config() const { return sim_; }
  bool finished() const { return outcome_.has_value(); }
  const std::optional<Outcome>& outcome() const { return outcome_; }
  int total_collision_steps() const { return total_collision_steps_; }

  // Advances the world by one step: pedestrians move by their controller
  // (with privileged access to all true states), the ego by the clipped
  // command. Throws EpisodeFinished when called after termination.
  StepEvents step(const EgoAction& action);

  // Controller velocity for every pedestrian, speed-capped. Pedestrians that
  // stand on their goal first get a fresh uniform random goal so the crowd
  // density stays constant over the whole horizon.
  std::vector<Vec2> pedestrian_commands();

 private:
  WorldState world_;
  ArenaConfig arena_;
  ScenarioConfig scenario_;
  SimConfig sim_;
  SplitMix64 respawn_rng_;
  int total_collision_steps_ = 0;
  std::optional<Outcome> outcome_;
};

}  // namespace crowdnav
