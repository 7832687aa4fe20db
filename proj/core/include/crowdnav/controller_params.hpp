#pragma once

namespace crowdnav {

// Tuning for the reciprocal-avoidance controller. Defaults are standard
// settings scaled to a 3 m arena.
struct OrcaParams {
  double time_horizon = 2.0;   // s, lookahead tau for the velocity obstacle
  double neighbor_dist = 2.0;  // m, agents beyond this are ignored
  int max_neighbors = 10;
  double max_speed = 1.0;  // m/s
};

// Tuning for the social-force controller (Helbing-typical constants).
struct SfmParams {
  double strength_a = 2.0;      // repulsion amplitude
  double range_b = 0.3;         // m, repulsion decay length
  double relaxation_time = 0.5; // s, pull toward the desired velocity
  double desired_speed = 1.0;   // m/s
};

enum class PedController { Orca, Sfm };

// Both parameter records travel with the episode context; `controller`
// selects which one drives the pedestrians.
struct ControllerParams {
  OrcaParams orca;
  SfmParams sfm;
};

}  // namespace crowdnav
