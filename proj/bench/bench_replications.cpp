// Serial reference loop vs the OpenMP replication kernel on the same
// experiment. Both produce identical tables; only wall time differs.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "mpsfit/simulation.hpp"

namespace {

mpsfit::ExperimentConfig comparison(std::size_t n) {
  mpsfit::ExperimentConfig c;
  c.model = mpsfit::Model::Gev;
  c.true_params = mpsfit::GevParams{0.2, 1.0, 1.0};
  c.n = n;
  c.replications = 200;
  c.methods = {mpsfit::Method::Mps, mpsfit::Method::Mle, mpsfit::Method::Pwm};
  return c;
}

mpsfit::ExperimentConfig cluster() {
  mpsfit::ExperimentConfig c;
  c.study = mpsfit::Study::Cluster;
  c.n = 50;
  c.replications = 200;
  c.cluster_size = 30;
  c.exp_lambda = 1.0;
  return c;
}

void run(benchmark::State& state, const mpsfit::ExperimentConfig& c, mpsfit::Execution exec) {
  for (auto _ : state) benchmark::DoNotOptimize(mpsfit::run_replications(c, exec));
  state.counters["threads"] =
      exec == mpsfit::Execution::Parallel ? static_cast<double>(omp_get_max_threads()) : 1.0;
  state.counters["reps/s"] = benchmark::Counter(static_cast<double>(c.replications),
                                                benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ComparisonSerial(benchmark::State& s) {
  run(s, comparison(static_cast<std::size_t>(s.range(0))), mpsfit::Execution::Serial);
}
void BM_ComparisonParallel(benchmark::State& s) {
  run(s, comparison(static_cast<std::size_t>(s.range(0))), mpsfit::Execution::Parallel);
}
void BM_ClusterSerial(benchmark::State& s) { run(s, cluster(), mpsfit::Execution::Serial); }
void BM_ClusterParallel(benchmark::State& s) { run(s, cluster(), mpsfit::Execution::Parallel); }

BENCHMARK(BM_ComparisonSerial)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ComparisonParallel)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ClusterSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ClusterParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
