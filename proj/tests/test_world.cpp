#include <doctest.h>

#include <cmath>

#include "crowdnav/errors.hpp"
#include "crowdnav/rng.hpp"
#include "crowdnav/world.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;

TEST_SUITE_BEGIN("world");

TEST_CASE("density matches pedestrians per square meter") {
  const ArenaConfig arena;  // 3 x 3
  CHECK(density(21, arena) == doctest::Approx(21.0 / 9.0).epsilon(1e-15));
  CHECK(std::abs(density(21, arena) - 2.33) < 0.005);
  CHECK(std::abs(density(11, arena) - 1.22) < 0.005);
  CHECK(density(0, arena) == 0.0);
}

TEST_CASE("density times area recovers the count") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    ArenaConfig arena{rng.uniform(0.5, 10.0), rng.uniform(0.5, 10.0)};
    const int n = rng.uniform_int(0, 40);
    const double recovered = density(n, arena) * arena.area();
    CHECK(recovered == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
  }
}

TEST_CASE("local_count uses a closed ball around the ego") {
  WorldState world;
  world.ego.position = {0.0, 0.0};

  SUBCASE("empty crowd") { CHECK(local_count(world, 1.0) == 0); }

  SUBCASE("only the near pedestrian counts") {
    AgentState a;
    a.position = {0.5, 0.0};
    AgentState b;
    b.position = {2.0, 0.0};
    world.pedestrians = {a, b};
    world.context.pedestrian_count = 2;
    CHECK(local_count(world, 1.0) == 1);
  }

  SUBCASE("boundary pedestrian is counted") {
    AgentState a;
    a.position = {1.0, 0.0};
    world.pedestrians = {a};
    world.context.pedestrian_count = 1;
    CHECK(local_count(world, 1.0) == 1);
  }
}

TEST_CASE("local_count is monotone in the radius") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const WorldState world = oracles::random_world(rng, rng.uniform_int(0, 20));
    int prev = 0;
    for (double r = 0.2; r < 4.5; r += 0.2) {
      const int count = local_count(world, r);
      CHECK(count >= prev);
      prev = count;
    }
    CHECK(prev == static_cast<int>(world.pedestrians.size()));
  }
}

TEST_CASE("sample_episode draws N from the requested interval") {
  const ArenaConfig arena;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const WorldState world =
        sample_episode(arena, 11, 16, seed, PedController::Sfm);
    CHECK(world.context.pedestrian_count >= 11);
    CHECK(world.context.pedestrian_count <= 16);
    CHECK(static_cast<int>(world.pedestrians.size()) ==
          world.context.pedestrian_count);
    CHECK(world.step_index == 0);
  }
}

TEST_CASE("sample_episode is a pure function of its inputs") {
  const ArenaConfig arena;
  const WorldState a = sample_episode(arena, 11, 16, 1234, PedController::Sfm);
  const WorldState b = sample_episode(arena, 11, 16, 1234, PedController::Sfm);
  REQUIRE(a.pedestrians.size() == b.pedestrians.size());
  CHECK(a.ego.position == b.ego.position);
  CHECK(a.ego.goal == b.ego.goal);
  for (std::size_t i = 0; i < a.pedestrians.size(); ++i) {
    CHECK(a.pedestrians[i].position == b.pedestrians[i].position);
    CHECK(a.pedestrians[i].goal == b.pedestrians[i].goal);
  }
}

TEST_CASE("sampled scenarios respect spawn clearance and goal distance") {
  const ArenaConfig arena;
  const ScenarioConfig scenario;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const WorldState world =
        sample_episode(arena, 5, 16, seed, PedController::Sfm, {}, scenario);
    std::vector<const AgentState*> agents = {&world.ego};
    for (const auto& ped : world.pedestrians) agents.push_back(&ped);

    for (std::size_t i = 0; i < agents.size(); ++i) {
      CHECK(norm(agents[i]->goal - agents[i]->position) >=
            scenario.min_goal_dist);
      for (std::size_t j = i + 1; j < agents.size(); ++j) {
        CHECK(norm(agents[i]->position - agents[j]->position) >
              agents[i]->radius + agents[j]->radius + scenario.clearance);
      }
    }
  }
}

TEST_CASE("22 disks of radius 0.15 fit in the 3x3 arena") {
  const WorldState world =
      sample_episode(ArenaConfig{}, 21, 21, 77, PedController::Sfm);
  CHECK(world.context.pedestrian_count == 21);
}

TEST_CASE("over-packed arenas raise PlacementFailure") {
  ArenaConfig tiny{0.8, 0.8};
  CHECK_THROWS_AS(sample_episode(tiny, 30, 30, 5, PedController::Sfm),
                  PlacementFailure);
}

TEST_CASE("clamp_to_arena keeps the disk inside") {
  const ArenaConfig arena;
  const Vec2 clamped = clamp_to_arena({-1.0, 5.0}, arena, 0.15);
  CHECK(clamped.x == 0.15);
  CHECK(clamped.y == 3.0 - 0.15);
}

TEST_SUITE_END();
