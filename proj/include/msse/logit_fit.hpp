#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msse/problem.hpp"
#include "msse/simulate.hpp"

namespace msse {

/// An option never or always chosen in some state: the likelihood has no
/// finite maximizer.
class SeparationError : public InputError {
public:
  using InputError::InputError;
};

/// Conditional-logit utilities u(n, state) = beta[param(n, state)], one
/// parameter per (option, distinct payoff value of that option). The last
/// option's lowest value is the reference and is pinned at zero (index -1).
struct LogitDesign {
  std::vector<std::string> names;
  std::vector<std::vector<int>> param;  // [option][state]
};

LogitDesign value_design(const ChoiceProblem& problem);

/// N x states matrix of choice counts.
Eigen::MatrixXd count_choices(const std::vector<Draw>& draws, const ChoiceProblem& problem);

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd estimate;
  Eigen::MatrixXd covariance;  // inverse negative Hessian
  Eigen::VectorXd std_error;   // square roots of its diagonal
  double log_likelihood = 0.0;
  double observations = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Newton ascent on the concave log-likelihood. Converged once the largest
/// score entry per observation is below `grad_tol`.
FitResult fit_logit(const LogitDesign& design, const Eigen::MatrixXd& counts,
                    double grad_tol = 1e-9, std::size_t max_iter = 200);

}  // namespace msse
