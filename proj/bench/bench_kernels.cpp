// Serial reference versus OpenMP kernels on the enumerated scene datasets.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "svq/gradients.hpp"
#include "svq/reference.hpp"
#include "svq/scene.hpp"
#include "svq/trainer.hpp"

namespace {

struct Fixture {
  svq::WeightedDataset data;
  svq::ChainParams chain;
};

// range(0): 0 independent (576 items), 1 correlated (120 items)
// range(1): number of stages
Fixture make(const benchmark::State& state) {
  svq::SceneConfig cfg;
  cfg.mode = state.range(0) == 0 ? svq::SceneMode::independent : svq::SceneMode::correlated;
  auto data = svq::enumerate_distribution(cfg);
  std::vector<svq::StageSpec> spec{{16, 20, 24}};
  if (state.range(1) > 1) spec.push_back({16, 20, 16});
  auto chain = svq::initialize(spec, data, 1, 0.5);
  return {std::move(data), std::move(chain)};
}

void BM_ReferenceGradients(benchmark::State& state) {
  const auto f = make(state);
  for (auto _ : state) benchmark::DoNotOptimize(svq::reference::chain_gradients(f.chain, f.data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void BM_ParallelGradients(benchmark::State& state) {
  const auto f = make(state);
  omp_set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(svq::chain_gradients(f.chain, f.data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void BM_ReferenceObjective(benchmark::State& state) {
  const auto f = make(state);
  for (auto _ : state) benchmark::DoNotOptimize(svq::reference::chain_objective(f.chain, f.data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void BM_ParallelObjective(benchmark::State& state) {
  const auto f = make(state);
  omp_set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(svq::chain_objective(f.chain, f.data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void serial_args(benchmark::internal::Benchmark* b) {
  for (int mode : {0, 1})
    for (int stages : {1, 2}) b->Args({mode, stages});
}

void parallel_args(benchmark::internal::Benchmark* b) {
  const int max_threads = omp_get_num_procs();
  for (int mode : {0, 1})
    for (int stages : {1, 2})
      for (int t = 1; t <= max_threads; t *= 2) b->Args({mode, stages, t});
}

}  // namespace

BENCHMARK(BM_ReferenceGradients)->Apply(serial_args)->ArgNames({"correlated", "stages"});
BENCHMARK(BM_ParallelGradients)->Apply(parallel_args)->ArgNames({"correlated", "stages", "threads"});
BENCHMARK(BM_ReferenceObjective)->Apply(serial_args)->ArgNames({"correlated", "stages"});
BENCHMARK(BM_ParallelObjective)->Apply(parallel_args)->ArgNames({"correlated", "stages", "threads"});

BENCHMARK_MAIN();
