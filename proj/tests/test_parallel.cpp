#include <doctest.h>

#include <cstdlib>

#include "msse/execution.hpp"
#include "msse/oracle.hpp"
#include "msse/sweep.hpp"
#include "support.hpp"

using namespace msse;

TEST_CASE("parallel sweep matches the serial one exactly") {
  const auto problem = fx::example1(0.25, 1.0);
  const SweepSpec spec{0, 0.05, 1.5, 12, SweepScale::Log};
  const auto serial = run_sweep(problem, spec, {}, Execution::Serial);
  const auto parallel = run_sweep(problem, spec, {}, Execution::Parallel);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].value == parallel[i].value);
    CHECK(serial[i].solution.objective == parallel[i].solution.objective);
    CHECK(serial[i].solution.policy.state_probs == parallel[i].solution.policy.state_probs);
  }
}

TEST_CASE("parallel sweep reports a failing point") {
  SolverOptions capped;
  capped.max_iter = 1;
  const SweepSpec spec{0, 0.1, 0.9, 4, SweepScale::Linear};
  const auto pts = run_sweep(fx::example2(0.25, 1.0), spec, capped, Execution::Parallel);
  for (const auto& p : pts) CHECK_FALSE(p.solution.converged);
  const SweepSpec bad{3, 0.1, 0.9, 4, SweepScale::Linear};
  CHECK_THROWS_AS(run_sweep(fx::example2(0.25, 1.0), bad, {}, Execution::Parallel), InputError);
}

TEST_CASE("parallel grid search matches the serial one exactly") {
  for (double l1 : {0.25, 0.7}) {
    const auto problem = fx::example2(l1, 1.0);
    OracleConfig cfg;
    cfg.max_grid_points = 50000;
    const auto serial = grid_solve(problem, cfg, Execution::Serial);
    const auto parallel = grid_solve(problem, cfg, Execution::Parallel);
    CHECK(serial.objective == parallel.objective);
    CHECK(serial.x == parallel.x);
  }
}

TEST_CASE("thread cap from the environment") {
  const int before = worker_threads();
  CHECK(before >= 1);
  ::setenv("MSSE_THREADS", "1", 1);
  CHECK(worker_threads() == 1);
  ::setenv("MSSE_THREADS", "junk", 1);
  CHECK(worker_threads() == before);
  ::unsetenv("MSSE_THREADS");
  CHECK(worker_threads() == before);
}
