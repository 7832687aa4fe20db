#include <benchmark/benchmark.h>

#include "crowdnav/evalbench.hpp"
#include "crowdnav/sim.hpp"
#include "crowdnav/world.hpp"

static void EngineStep(benchmark::State& state) {
  const crowdnav::ArenaConfig arena;
  const crowdnav::ScenarioConfig scenario;
  const crowdnav::SimConfig sim;
  const int n = static_cast<int>(state.range(0));
  const crowdnav::WorldState world0 = crowdnav::sample_episode(
      arena, n, n, 11, crowdnav::PedController::Sfm, {}, scenario);
  crowdnav::Engine engine(world0, arena, scenario, sim);
  for (auto _ : state) {
    if (engine.finished()) {
      state.PauseTiming();
      engine = crowdnav::Engine(world0, arena, scenario, sim);
      state.ResumeTiming();
    }
    auto events = engine.step({{0.3, 0.1}});
    benchmark::DoNotOptimize(events);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(EngineStep)->Arg(5)->Arg(11)->Arg(21);

static void OrcaEgoEpisode(benchmark::State& state) {
  const crowdnav::ArenaConfig arena;
  const crowdnav::ScenarioConfig scenario;
  const crowdnav::SimConfig sim;
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const crowdnav::WorldState world = crowdnav::sample_episode(
        arena, n, n, ++seed, crowdnav::PedController::Sfm, {}, scenario);
    crowdnav::OrcaEgoPolicy policy(crowdnav::OrcaParams{}, sim.dt);
    auto record = crowdnav::run_episode(policy, world, arena, scenario, sim);
    benchmark::DoNotOptimize(record);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(OrcaEgoEpisode)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
