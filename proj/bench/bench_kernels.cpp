// Serial reference against the OpenMP kernels: a 32-point multiplier sweep
// and the coarse pass of the grid oracle.
#include <benchmark/benchmark.h>

#include "msse/oracle.hpp"
#include "msse/problem_io.hpp"
#include "msse/sweep.hpp"

namespace {

const msse::ChoiceProblem& example(const char* file) {
  static const msse::ChoiceProblem one = msse::parse_problem(MSSE_DATA_DIR "/example1.json").problem;
  static const msse::ChoiceProblem two = msse::parse_problem(MSSE_DATA_DIR "/example2.json").problem;
  return std::string(file) == "example1" ? one : two;
}

void sweep(benchmark::State& state, msse::Execution exec) {
  const auto& problem = example("example1");
  msse::SweepSpec spec{0, 0.05, 1.0, 32, msse::SweepScale::Log};
  for (auto _ : state) {
    benchmark::DoNotOptimize(msse::run_sweep(problem, spec, {}, exec));
  }
}

void grid(benchmark::State& state, msse::Execution exec) {
  const auto& problem = example("example2");
  msse::OracleConfig config;
  config.max_grid_points = 200'000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(msse::grid_solve(problem, config, exec));
  }
}

}  // namespace

BENCHMARK_CAPTURE(sweep, serial, msse::Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep, parallel, msse::Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(grid, serial, msse::Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(grid, parallel, msse::Execution::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
