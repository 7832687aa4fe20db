#pragma once

#include <array>
#include <string>
#include <vector>

#include "crowdnav/config.hpp"
#include "crowdnav/evalbench.hpp"
#include "crowdnav/world.hpp"

namespace crowdnav {

// Line-delimited trace: a header object carrying the format version, the
// config hash and the full config snapshot, one object for the initial state,
// one per step, and a final outcome object. Numbers are written in shortest
// round-trip decimal form so a reader recovers every double bit-exactly.
inline constexpr int kTraceVersion = 1;

struct TraceStep {
  int t = 0;
  std::array<double, 4> ego{};  // px, py, vx, vy
  Vec2 action;
  std::vector<std::array<double, 4>> pedestrians;
  std::vector<int> collisions;
  bool reached_goal = false;
  bool frozen = false;
};

struct TraceData {
  int version = kTraceVersion;
  std::string config_hash;
  std::string config_text;
  std::uint64_t episode_seed = 0;
  int n = 0;
  std::string ego_id;
  std::array<double, 4> initial_ego{};
  std::vector<std::array<double, 4>> initial_pedestrians;
  std::vector<TraceStep> steps;
  std::string outcome;
  int collision_steps = 0;
  int steps_taken = 0;
  double final_goal_distance = 0.0;
};

// Serializes an episode (initial state + per-step records + outcome) with the
// configuration that produced it.
std::string write_trace(const RunConfig& cfg, const WorldState& world0,
                        const EpisodeRecord& record);

// Parses a trace; throws TraceError on malformed input or an unsupported
// version.
TraceData parse_trace(const std::string& text);

struct ReplayResult {
  bool ok = false;
  int divergence_step = -1;  // -1 when ok or when the header itself fails
  std::string message;
};

// Re-simulates the episode from the recorded seed and action sequence and
// verifies every recorded state bit-exactly against the recomputation.
ReplayResult replay_trace(const TraceData& trace);

}  // namespace crowdnav
