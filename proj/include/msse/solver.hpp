#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msse/policy.hpp"
#include "msse/problem.hpp"

namespace msse {

enum class Method { ExponentiatedGradient, FixedPoint };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct SolverOptions {
  Method method = Method::ExponentiatedGradient;
  double step_tol = 1e-10;       // sup-norm change of x between accepted iterates
  double residual_tol = 1e-8;    // sup-norm of x minus its re-aggregated choice rule
  std::size_t max_iter = 100000;
  double prune_threshold = 1e-12;
  double damping = 0.5;          // initial step of the fixed-point update
  double reintroduce_mass = 1e-3;
  bool record_trace = false;
};

struct Solution {
  Policy policy;
  double objective = 0.0;        // payoff units
  std::size_t iterations = 0;
  double residual = 0.0;         // max of the two verify_fixed_point() measures
  std::vector<std::size_t> support;
  bool converged = false;
  Method method = Method::ExponentiatedGradient;
  std::vector<double> trace;     // objective after each accepted iterate
  std::vector<std::size_t> trace_restarts;  // trace indices where a reintroduced option restarts the ascent
};

/// lambda_M * sum_w mu(w) ln sum_n [prod_k Pr(n | cell_k(w))^weight_k] e^{v_n(w)/lambda_M},
/// with the cell probabilities aggregated from deep-cell variables x.
/// Defined for any non-negative x leaving every state at least one option.
double corollary_objective(const Eigen::MatrixXd& x, const ChoiceProblem& problem);

/// Analytic gradient of corollary_objective with respect to x.
Eigen::MatrixXd corollary_gradient(const Eigen::MatrixXd& x, const ChoiceProblem& problem);

Solution solve(const ChoiceProblem& problem, const SolverOptions& options = {});

struct FixedPointReport {
  double choice_residual = 0.0;       // max |Pr(n|w) - choice rule(aggregates of Pr)|
  double aggregation_residual = 0.0;  // max |stored aggregate - aggregate of Pr(n|w)|
  double worst() const { return std::max(choice_residual, aggregation_residual); }
};

FixedPointReport verify_fixed_point(const Policy& policy, const ChoiceProblem& problem);

/// Random-utility reading of a solution: true value, value scaled by
/// 1/lambda_M, the informational fixed effect alpha, and lambda_M * alpha.
struct BiasEntry {
  std::size_t option = 0;
  std::size_t state = 0;
  double v_true = 0.0;
  double v_scaled = 0.0;
  double alpha = 0.0;  // -inf when the option is never chosen in the cell
  double bias_payoff = 0.0;
};

std::vector<BiasEntry> ru_bias(const Solution& solution, const ChoiceProblem& problem);

}  // namespace msse
