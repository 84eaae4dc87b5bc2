// Serial reference vs. OpenMP runner for the sweep kernels.

#include <benchmark/benchmark.h>

#include "pcie_dma/experiments.h"

namespace {

using namespace pcie_dma;

Execution policy(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_MwrSweep(benchmark::State& state) {
  ExperimentSpec spec;
  spec.points = default_mwr_points();
  for (auto _ : state) {
    auto r = run_mwr_sweep(spec, policy(state));
    benchmark::DoNotOptimize(r.rows.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_MwrSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MrdSweep(benchmark::State& state) {
  ExperimentSpec spec;
  spec.points = default_mrd_points();
  for (auto _ : state) {
    auto r = run_mrd_sweep(spec, policy(state));
    benchmark::DoNotOptimize(r.rows.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_MrdSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CounterGrid(benchmark::State& state) {
  const auto n = static_cast<uint32_t>(state.range(1));
  for (auto _ : state) {
    auto g = run_counter_grid(SimConfig{}, n, n, policy(state));
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_CounterGrid)
    ->ArgsProduct({{0, 1}, {16, 64}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
