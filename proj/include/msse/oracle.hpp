#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "msse/execution.hpp"
#include "msse/information.hpp"
#include "msse/partition.hpp"
#include "msse/problem.hpp"

namespace msse {

/// Raised when an instance is too large for brute force. Callers that run the
/// oracles opportunistically report this as a skip.
class OracleCapExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct OracleConfig {
  double grid_step = 1e-3;
  std::size_t max_states = 4;
  std::size_t max_options = 3;
  std::size_t max_sources = 3;
  std::size_t max_free_dims = 4;
  std::size_t max_grid_points = 1'000'000;  // coarse pass budget
  unsigned restarts = 6;                    // direct_policy_solve
  std::uint64_t seed = 12345;

  void validate() const;
};

struct StrategyOptimum {
  double cost = 0.0;
  LearningStrategy witness;
};

/// Cheapest ordered question sequence drawn from `sources` that pins down the
/// state, found by trying every ordering of every generating subset.
StrategyOptimum min_strategy_cost(const std::vector<InfoSource>& sources, const Distribution& mu,
                                  const OracleConfig& config = {});

struct GridOptimum {
  double objective = 0.0;
  Eigen::MatrixXd x;  // N x deep cells, in the problem's deep-cell order
  std::size_t evaluations = 0;
};

/// Grid search over the deep-cell simplices followed by pairwise-transfer
/// compass refinement, with its own objective evaluator.
GridOptimum grid_solve(const ChoiceProblem& problem, const OracleConfig& config = {},
                       Execution exec = Execution::Parallel);

/// The same objective as grid_solve uses, exposed for tests.
double grid_objective(const ChoiceProblem& problem, const Eigen::MatrixXd& x);

struct DirectOptimum {
  double objective = 0.0;      // expected payoff minus policy cost
  Eigen::MatrixXd state_probs;  // N x states
};

/// Maximizes expected payoff minus the layered policy cost over the full
/// per-state choice matrix by entropic mirror ascent from several starts.
DirectOptimum direct_policy_solve(const ChoiceProblem& problem, const OracleConfig& config = {});

/// Central differences in every coordinate, each column projected onto the
/// tangent space of its simplex (column mean removed).
Eigen::MatrixXd finite_diff_grad(const std::function<double(const Eigen::MatrixXd&)>& f,
                                 const Eigen::MatrixXd& x, double step);

}  // namespace msse
