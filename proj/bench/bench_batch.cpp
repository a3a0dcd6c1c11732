// Serial reference vs OpenMP batch evaluation of the forward model QoI.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "sgpuq/forward_model.hpp"
#include "sgpuq/sampling.hpp"
#include "sgpuq/sensitivity.hpp"

namespace {

const sgpuq::SampleMatrix& design() {
  static const auto m = sgpuq::lhs_sample(sgpuq::ParamBox::pillar_priors(), 64, 42);
  return m;
}

sgpuq::RowModel qoi_at(double length) {
  return [length, fm = sgpuq::ForwardModel{}](std::span<const double> th) { return fm.strain_energy(th, length); };
}

void BM_Serial(benchmark::State& state) {
  const auto model = qoi_at(500.0);
  for (auto _ : state) benchmark::DoNotOptimize(sgpuq::evaluate_batch_serial(design(), model));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(design().rows));
}

void BM_Parallel(benchmark::State& state) {
  const auto model = qoi_at(500.0);
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sgpuq::evaluate_batch_parallel(design(), model, jobs));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(design().rows));
}

}  // namespace

BENCHMARK(BM_Serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)
    ->RangeMultiplier(2)
    ->Range(1, omp_get_max_threads())
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
