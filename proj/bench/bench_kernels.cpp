// Serial reference vs parallel kernels on an operator-sized synthetic workload.

#include <benchmark/benchmark.h>

#include "edgecache/experiments.hpp"

using namespace edgecache;

namespace {

ExperimentConfig workload() {
  ExperimentConfig c;
  c.synthetic.num_contents = 4000;
  c.synthetic.num_requests = 100000;
  c.storage_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  c.cf.epochs = 20;
  return c;
}

const Scenario& scenario() {
  static const Scenario s = prepare_scenario(workload());
  return s;
}

const CachePlacement& placement() {
  static const CachePlacement p = greedy_place(to_dense(scenario().ground), scenario().catalog,
                                               StorageBudget::of_library(0.4, scenario().catalog.total_bytes()));
  return p;
}

LinkConfig links() { return LinkConfig::from_totals(16, 3.8e6, 120e6); }

void BM_GreedyReference(benchmark::State& state) {
  const DenseMatrix pop = to_dense(scenario().ground);
  const auto budget = StorageBudget::of_library(0.4, scenario().catalog.total_bytes());
  for (auto _ : state) benchmark::DoNotOptimize(reference::greedy_place_serial(pop, scenario().catalog, budget));
}

void BM_Greedy(benchmark::State& state) {
  const DenseMatrix pop = to_dense(scenario().ground);
  const auto budget = StorageBudget::of_library(0.4, scenario().catalog.total_bytes());
  const Exec exec = state.range(0) ? Exec::Parallel : Exec::Serial;
  for (auto _ : state) benchmark::DoNotOptimize(greedy_place(pop, scenario().catalog, budget, exec));
}

void BM_SimulateReference(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::simulate_serial(scenario().log, scenario().catalog, placement(), links()));
}

void BM_Simulate(benchmark::State& state) {
  const Exec exec = state.range(0) ? Exec::Parallel : Exec::Serial;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate(scenario().log, scenario().catalog, placement(), links(), exec));
}

void BM_StorageSweep(benchmark::State& state) {
  const Exec exec = state.range(0) ? Exec::Parallel : Exec::Serial;
  const ExperimentConfig c = workload();
  for (auto _ : state) benchmark::DoNotOptimize(run_storage_sweep(scenario(), c, exec));
}

}  // namespace

BENCHMARK(BM_GreedyReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Greedy)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StorageSweep)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
