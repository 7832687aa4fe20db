#include <benchmark/benchmark.h>

#include "crowdnav/peds.hpp"
#include "crowdnav/rng.hpp"
#include "support_bench.hpp"

static void OrcaVelocity(benchmark::State& state) {
  crowdnav::SplitMix64 rng(4);
  const crowdnav::WorldState world =
      crowdnav_bench::random_world(rng, static_cast<int>(state.range(0)));
  const crowdnav::OrcaParams params;
  for (auto _ : state) {
    auto v = crowdnav::orca_velocity(0, world, params, 0.1);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(OrcaVelocity)->Arg(5)->Arg(11)->Arg(21);

static void SfmVelocity(benchmark::State& state) {
  crowdnav::SplitMix64 rng(5);
  const crowdnav::WorldState world =
      crowdnav_bench::random_world(rng, static_cast<int>(state.range(0)));
  const crowdnav::SfmParams params;
  for (auto _ : state) {
    auto v = crowdnav::sfm_velocity(0, world, params, 0.1);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(SfmVelocity)->Arg(5)->Arg(11)->Arg(21);

static void SolveLp2(benchmark::State& state) {
  crowdnav::SplitMix64 rng(6);
  std::vector<crowdnav::HalfPlane> constraints;
  for (int i = 0; i < state.range(0); ++i) {
    const double angle = rng.uniform(0.0, 6.2831853);
    constraints.push_back({{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)},
                           {std::cos(angle), std::sin(angle)}});
  }
  for (auto _ : state) {
    auto v = crowdnav::solve_lp2(constraints, {0.7, 0.2}, 1.0);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(SolveLp2)->Arg(2)->Arg(5)->Arg(10);
