#include <benchmark/benchmark.h>

#include <random>

#include "dynapool/preprocessing.hpp"
#include "dynapool/rank_pooling.hpp"
#include "dynapool/representations.hpp"

using namespace dynapool;

namespace {

DepthSequence clip(int size, int frames) {
  SynthSpec spec;
  spec.archetype = Archetype::circle;
  spec.frames = frames;
  spec.width = spec.height = size;
  spec.noise_level = 5.0;
  spec.seed = 17;
  return synth_sequence(spec);
}

// Frame count x feature dimension.
void BM_RankPool(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FeatureVector> phi(frames);
  for (auto& f : phi) {
    f.values.resize(dim);
    for (double& v : f.values) v = u(rng);
  }
  const auto means = prefix_means(phi);
  for (auto _ : state) benchmark::DoNotOptimize(rank_pool(means, PoolingConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames * dim));
}
BENCHMARK(BM_RankPool)->Args({24, 64 * 64})->Args({24, 3 * 64 * 64})->Args({48, 64 * 64})->Unit(benchmark::kMillisecond);

void BM_Normals(benchmark::State& state) {
  const auto seq = clip(static_cast<int>(state.range(0)), 2);
  const auto range = default_range(seq);
  for (auto _ : state) benchmark::DoNotOptimize(compute_normals(seq.frames()[0], range));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Normals)->Arg(64)->Arg(320)->Unit(benchmark::kMicrosecond);

void BM_BackgroundRemoval(benchmark::State& state) {
  const auto seq = clip(static_cast<int>(state.range(0)), 24);
  for (auto _ : state) benchmark::DoNotOptimize(remove_background(seq, HistogramConfig{}));
}
BENCHMARK(BM_BackgroundRemoval)->Arg(64)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_Gmm(benchmark::State& state) {
  const auto seq = clip(static_cast<int>(state.range(0)), 24);
  for (auto _ : state) benchmark::DoNotOptimize(gmm_foreground(seq, GmmConfig{}));
  state.SetItemsProcessed(state.iterations() * 24 * state.range(0) * state.range(0));
}
BENCHMARK(BM_Gmm)->Arg(64)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_BuildAll(benchmark::State& state) {
  const auto seq = clip(64, static_cast<int>(state.range(0)));
  const RepresentationConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_all(seq, cfg));
}
BENCHMARK(BM_BuildAll)->Arg(24)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
