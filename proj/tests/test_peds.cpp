#include <doctest.h>

#include <cmath>

#include "crowdnav/peds.hpp"
#include "crowdnav/rng.hpp"
#include "crowdnav/sim.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;

namespace {

AgentState agent(Vec2 pos, Vec2 vel, Vec2 goal = {0.0, 0.0}) {
  AgentState a;
  a.position = pos;
  a.velocity = vel;
  a.goal = goal;
  return a;
}

bool satisfied(const HalfPlane& h, Vec2 v, double slack = 0.0) {
  return dot(v - h.point, h.normal) >= -slack;
}

}  // namespace

TEST_SUITE_BEGIN("peds");

TEST_CASE("non-conflicting pairs keep the current velocity strictly feasible") {
  // Other agent far away and receding: the cone never threatens self's
  // current velocity within the horizon.
  const AgentState self = agent({0.0, 0.0}, {0.3, 0.0});
  const AgentState other = agent({10.0, 10.0}, {0.5, 0.5});
  const HalfPlane h = orca_halfplane(self, other, OrcaParams{}, 0.1);
  CHECK(dot(self.velocity - h.point, h.normal) > 0.0);
  CHECK(norm(h.normal) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mirror-symmetric pairs produce mirror-image half-planes") {
  const AgentState a = agent({-1.0, 0.0}, {0.8, 0.0});
  const AgentState b = agent({1.0, 0.0}, {-0.8, 0.0});
  const HalfPlane ha = orca_halfplane(a, b, OrcaParams{}, 0.1);
  const HalfPlane hb = orca_halfplane(b, a, OrcaParams{}, 0.1);
  // Reflecting through the origin maps one constraint onto the other.
  CHECK(ha.point.x == doctest::Approx(-hb.point.x).epsilon(1e-12));
  CHECK(ha.point.y == doctest::Approx(-hb.point.y).epsilon(1e-12));
  CHECK(ha.normal.x == doctest::Approx(-hb.normal.x).epsilon(1e-12));
  CHECK(ha.normal.y == doctest::Approx(-hb.normal.y).epsilon(1e-12));
}

TEST_CASE("overlapping agents separate along the center line") {
  const AgentState self = agent({0.5, 0.5}, {0.2, 0.1});
  const AgentState other = agent({0.7, 0.5}, {0.2, 0.1});  // same velocity
  const HalfPlane h = orca_halfplane(self, other, OrcaParams{}, 0.1);
  const Vec2 away = normalized_or(self.position - other.position, {1.0, 0.0});
  CHECK(h.normal.x == doctest::Approx(away.x).epsilon(1e-12));
  CHECK(h.normal.y == doctest::Approx(away.y).epsilon(1e-12));
}

TEST_CASE("solve_lp2 with no constraints projects onto the speed disk") {
  CHECK(solve_lp2({}, {0.3, 0.2}, 1.0) == Vec2{0.3, 0.2});
  const Vec2 scaled = solve_lp2({}, {3.0, 4.0}, 1.0);
  CHECK(scaled.x == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(scaled.y == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("one violated half-plane projects the preferred velocity onto it") {
  // Constraint: v.x >= 0.5; preferred (0.1, 0.2) violates it. The nearest
  // feasible point is the orthogonal projection (0.5, 0.2).
  const HalfPlane h{{0.5, 0.0}, {1.0, 0.0}};
  const Vec2 v = solve_lp2({h}, {0.1, 0.2}, 1.0);
  CHECK(v.x == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(v.y == doctest::Approx(0.2).epsilon(1e-9));

  const auto grid = oracles::lp_grid_search({h}, {0.1, 0.2}, 1.0);
  REQUIRE(grid.has_value());
  CHECK(norm(v - *grid) < 1e-3 + 0.0071);  // grid resolution slack
}

TEST_CASE("solve_lp2 respects the speed bound and the grid oracle") {
  SplitMix64 rng(2024);
  int feasible_checked = 0;
  while (feasible_checked < 120) {
    std::vector<HalfPlane> constraints;
    const int m = rng.uniform_int(1, 6);
    for (int i = 0; i < m; ++i) {
      const double angle = rng.uniform(0.0, 6.2831853);
      const Vec2 normal{std::cos(angle), std::sin(angle)};
      constraints.push_back({{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)},
                             normal});
    }
    const Vec2 preferred{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    const Vec2 v = solve_lp2(constraints, preferred, 1.0);
    CHECK(norm(v) <= 1.0 + 1e-9);

    const auto grid = oracles::lp_grid_search(constraints, preferred, 1.0);
    if (!grid.has_value()) continue;  // infeasible instance: only bound checked
    ++feasible_checked;
    for (const auto& h : constraints) CHECK(satisfied(h, v, 1e-9));
    CHECK(norm(v - *grid) <= 0.02);
  }
}

TEST_CASE("orca_velocity with no neighbors returns the preferred velocity") {
  WorldState world;
  world.ego = agent({0.5, 0.5}, {0.0, 0.0}, {2.5, 0.5});
  const Vec2 v = orca_velocity(0, world, OrcaParams{}, 0.1);
  const Vec2 expected = rotated({1.0, 0.0}, 1e-4);
  CHECK(v.x == doctest::Approx(expected.x).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(expected.y).epsilon(1e-12));
}

TEST_CASE("orca_velocity at the goal commands zero") {
  WorldState world;
  world.ego = agent({1.5, 1.5}, {0.0, 0.0}, {1.5, 1.5});
  CHECK(norm(orca_velocity(0, world, OrcaParams{}, 0.1)) < 1e-12);
}

TEST_CASE("head-on ORCA pairs cross without touching") {
  SplitMix64 rng(99);
  int clean = 0;
  const int runs = 20;
  for (int run = 0; run < runs; ++run) {
    WorldState world;
    const double jitter = rng.uniform(-0.05, 0.05);
    world.ego = agent({0.3, 1.5 + jitter}, {0.0, 0.0}, {2.7, 1.5 - jitter});
    AgentState ped = agent({2.7, 1.5 - jitter}, {0.0, 0.0}, {0.3, 1.5 + jitter});
    world.pedestrians = {ped};
    world.context.pedestrian_count = 1;
    world.context.controller = PedController::Orca;
    world.context.seed = run;

    Engine engine(world, ArenaConfig{}, ScenarioConfig{}, SimConfig{});
    bool contact = false;
    for (int t = 0; t < 100 && !engine.finished(); ++t) {
      const Vec2 command = orca_velocity(0, engine.world(), OrcaParams{}, 0.1);
      if (!engine.step({command}).collisions.empty()) contact = true;
    }
    if (!contact) ++clean;
  }
  CHECK(clean == runs);
}

TEST_CASE("sfm equilibrium produces zero force") {
  WorldState world;
  world.ego = agent({0.5, 1.5}, {1.0, 0.0}, {2.5, 1.5});  // v == desired
  const Vec2 v = sfm_velocity(0, world, SfmParams{}, 0.1);
  CHECK(v.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sfm repulsion decreases with distance and equals A at contact") {
  SfmParams params;
  const auto repulsion_speed = [&](double gap) {
    WorldState world;
    // Parked on its goal: the relaxation term vanishes, only repulsion acts.
    world.ego = agent({1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0});
    world.pedestrians = {agent({1.0 + gap, 1.0}, {0.0, 0.0})};
    world.context.pedestrian_count = 1;
    return norm(sfm_velocity(0, world, params, 0.1));
  };
  CHECK(repulsion_speed(0.4) > repulsion_speed(0.6));
  CHECK(repulsion_speed(0.6) > repulsion_speed(0.9));
  // At exact contact distance (radii sum 0.3) the magnitude is A.
  CHECK(repulsion_speed(0.3) ==
        doctest::Approx(params.strength_a * 0.1).epsilon(1e-12));
}

TEST_CASE("sfm is rotation-equivariant") {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    WorldState world = oracles::random_world(rng, 4);
    const double angle = rng.uniform(0.0, 6.2831853);
    WorldState turned = world;
    const auto rotate_agent = [&](AgentState& a) {
      a.position = rotated(a.position, angle);
      a.velocity = rotated(a.velocity, angle);
      a.goal = rotated(a.goal, angle);
    };
    rotate_agent(turned.ego);
    for (auto& ped : turned.pedestrians) rotate_agent(ped);

    const Vec2 v = sfm_velocity(0, world, SfmParams{}, 0.1);
    const Vec2 v_turned = sfm_velocity(0, turned, SfmParams{}, 0.1);
    const Vec2 expected = rotated(v, angle);
    CHECK(v_turned.x == doctest::Approx(expected.x).epsilon(1e-9));
    CHECK(v_turned.y == doctest::Approx(expected.y).epsilon(1e-9));
  }
}

TEST_CASE("controllers are pure functions of their inputs") {
  SplitMix64 rng(7);
  const WorldState world = oracles::random_world(rng, 6);
  CHECK(orca_velocity(2, world, OrcaParams{}, 0.1) ==
        orca_velocity(2, world, OrcaParams{}, 0.1));
  CHECK(sfm_velocity(2, world, SfmParams{}, 0.1) ==
        sfm_velocity(2, world, SfmParams{}, 0.1));
}

TEST_SUITE_END();
