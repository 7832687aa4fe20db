#include <benchmark/benchmark.h>

#include "crowdnav/encoder.hpp"
#include "crowdnav/rng.hpp"
#include "support_bench.hpp"

static void EncodeObservation(benchmark::State& state) {
  crowdnav::SplitMix64 rng(1);
  const crowdnav::WorldState world =
      crowdnav_bench::random_world(rng, static_cast<int>(state.range(0)));
  const crowdnav::EncoderConfig cfg;
  for (auto _ : state) {
    auto obs = crowdnav::encode(world, cfg);
    benchmark::DoNotOptimize(obs);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(EncodeObservation)->Arg(5)->Arg(11)->Arg(21)->Arg(30);

static void NormalizerUpdate(benchmark::State& state) {
  crowdnav::SplitMix64 rng(2);
  const crowdnav::EncoderConfig cfg;
  crowdnav::RunningNormalizer norm(cfg.observation_dim(), 10.0, 1e-8);
  const crowdnav::Observation obs =
      crowdnav::encode(crowdnav_bench::random_world(rng, 16), cfg);
  for (auto _ : state) {
    norm.update(obs);
    benchmark::DoNotOptimize(norm);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(NormalizerUpdate);

static void NormalizerNormalize(benchmark::State& state) {
  crowdnav::SplitMix64 rng(3);
  const crowdnav::EncoderConfig cfg;
  crowdnav::RunningNormalizer norm(cfg.observation_dim(), 10.0, 1e-8);
  const crowdnav::Observation obs =
      crowdnav::encode(crowdnav_bench::random_world(rng, 16), cfg);
  for (int i = 0; i < 100; ++i) norm.update(obs);
  for (auto _ : state) {
    auto z = norm.normalize(obs);
    benchmark::DoNotOptimize(z);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(NormalizerNormalize);
