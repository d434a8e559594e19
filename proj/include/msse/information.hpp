#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "msse/distribution.hpp"
#include "msse/partition.hpp"
#include "msse/policy.hpp"
#include "msse/problem.hpp"

namespace msse {

/// Raised when a policy's stored aggregates disagree with its per-state
/// probabilities.
class InconsistentPolicy : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// -sum p ln p over the block masses of `p`, with 0 ln 0 = 0. Natural log.
double shannon_entropy(const Partition& p, const Distribution& mu);

/// Expected entropy of `p` after learning the block of `given`.
double conditional_entropy(const Partition& p, const Partition& given, const Distribution& mu);

/// Same, conditioning on arbitrary disjoint cells (possibly the single full
/// cell). Zero-mass cells contribute nothing.
double conditional_entropy(const Partition& p, std::span<const Event> given_cells,
                           const Distribution& mu);

double mutual_information(const Partition& p, const Partition& q, const Distribution& mu);

/// Ordered questions, each priced at multiplier x entropy.
class LearningStrategy {
public:
  struct Step {
    Partition partition;
    double multiplier;
  };

  /// Rejects repeated partitions and non-positive multipliers.
  explicit LearningStrategy(std::vector<Step> steps);

  const std::vector<Step>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }

private:
  std::vector<Step> steps_;
};

/// Sum over steps of multiplier x entropy of the step given everything asked
/// before it.
double strategy_cost(const LearningStrategy& s, const Distribution& mu);

/// Cost of learning the state by asking the layers cheapest first.
double total_uncertainty(const LayeredStructure& layers, const Distribution& mu);

/// Expected reduction in total uncertainty implied by per-state choice
/// probabilities (N x |states|); aggregates are derived from them.
double policy_cost(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem);

/// As above; throws InconsistentPolicy if the policy's deep-cell variables do
/// not match its per-state probabilities to within `consistency_tol`.
double policy_cost(const Policy& policy, const ChoiceProblem& problem,
                   double consistency_tol = 1e-6);

/// Prior-weighted payoff of the options chosen under per-state probabilities.
double expected_payoff(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem);

}  // namespace msse
