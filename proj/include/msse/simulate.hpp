#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "msse/problem.hpp"

namespace msse {

struct Draw {
  std::size_t state = 0;
  std::size_t option = 0;
};

/// Uniform on [0, 1) from the top 53 bits of one mt19937_64 output, so a seed
/// gives the same stream on every platform.
double unit_uniform(std::mt19937_64& gen);

/// Index i with probability weights[i] (inverse CDF over the running sum).
std::size_t sample_index(const std::vector<double>& weights, double u);

/// i.i.d. draws: state from the prior, then an option from the state's
/// column of `state_probs` (N x states).
std::vector<Draw> simulate(const ChoiceProblem& problem, const Eigen::MatrixXd& state_probs,
                           std::size_t draws, std::uint64_t seed);

}  // namespace msse
