#pragma once

#include <vector>

#include <Eigen/Dense>

#include "msse/problem.hpp"

namespace msse {

/// Raised when a set of aggregate choice probabilities leaves some state with
/// no option that can be chosen.
class InadmissibleAggregates : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Pr(n | cell) at each depth of the layer refinement. levels[k] is
/// N x |cells at depth k|; levels[0] is the single column Pr(n).
struct Aggregates {
  std::vector<Eigen::MatrixXd> levels;
};

/// Prior-weighted averages of the deepest-cell probabilities up the refinement.
Aggregates aggregate_deep(const Eigen::MatrixXd& x, const ChoiceProblem& problem);

/// Prior-weighted averages of per-state probabilities at every depth.
Aggregates aggregate_states(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem);

/// Deepest-cell level of aggregate_states().
Eigen::MatrixXd deep_from_states(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem);

/// Per-state choice probabilities implied by the aggregates: a weighted
/// geometric mean of Pr(n | cell) over depths, tilted by exp(v / lambda_M)
/// and normalized across options. Computed in the log domain; an option with
/// any zero factor gets probability zero.
Eigen::MatrixXd state_choice_probs(const Aggregates& aggregates, const ChoiceProblem& problem);

/// Choice behaviour parameterized by Pr(n | B) on the deepest cells B.
struct Policy {
  std::vector<Event> deep_cells;
  Eigen::MatrixXd x;            // N x |deep cells|, columns on the simplex
  Aggregates aggregates;        // derived from x
  Eigen::MatrixXd state_probs;  // N x |states|, from state_choice_probs()

  Eigen::VectorXd unconditional() const { return aggregates.levels.front().col(0); }
};

Policy make_policy(Eigen::MatrixXd x, const ChoiceProblem& problem);

/// x = 1/N in every deep cell.
Eigen::MatrixXd uniform_deep(const ChoiceProblem& problem);

}  // namespace msse
