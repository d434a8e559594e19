#include "msse/simulate.hpp"

namespace msse {

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  // Rounding left u above the final partial sum.
  return last;
}

std::vector<Draw> simulate(const ChoiceProblem& problem, const Eigen::MatrixXd& state_probs,
                           std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw InputError("draws must be at least 1");
  if (state_probs.rows() != static_cast<Eigen::Index>(problem.num_options()) ||
      state_probs.cols() != static_cast<Eigen::Index>(problem.num_states())) {
    throw InputError("choice probabilities have the wrong shape");
  }
  std::vector<std::vector<double>> columns(problem.num_states());
  for (std::size_t s = 0; s < columns.size(); ++s) {
    const auto col = state_probs.col(static_cast<Eigen::Index>(s));
    columns[s].assign(col.data(), col.data() + col.size());
  }
  std::mt19937_64 gen(seed);
  std::vector<Draw> out(draws);
  for (auto& d : out) {
    d.state = sample_index(problem.prior().probs(), unit_uniform(gen));
    d.option = sample_index(columns[d.state], unit_uniform(gen));
  }
  return out;
}

}  // namespace msse
