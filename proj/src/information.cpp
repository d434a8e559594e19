#include "msse/information.hpp"

#include <cmath>
#include <string>

namespace msse {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

void require_size(const Partition& p, const Distribution& mu) {
  if (p.num_states() != mu.size()) {
    throw InputError("partition and distribution live on different state spaces");
  }
}

// Entropy of the block masses of `p` restricted to `cell`, normalized by
// `cell_mass`.
double entropy_within(const Partition& p, Event cell, double cell_mass, const Distribution& mu) {
  KahanSum h;
  for (const auto& b : p.blocks()) {
    const double m = mu.mass(b & cell) / cell_mass;
    h.add(-plogp(m));
  }
  return h.value();
}

}  // namespace

double shannon_entropy(const Partition& p, const Distribution& mu) {
  require_size(p, mu);
  KahanSum h;
  for (const auto& b : p.blocks()) h.add(-plogp(mu.mass(b)));
  return std::max(0.0, h.value());
}

double conditional_entropy(const Partition& p, std::span<const Event> given_cells,
                           const Distribution& mu) {
  require_size(p, mu);
  KahanSum h;
  for (const auto& cell : given_cells) {
    const double m = mu.mass(cell);
    if (!(m > 0.0)) continue;
    h.add(m * entropy_within(p, cell, m, mu));
  }
  return std::max(0.0, h.value());
}

double conditional_entropy(const Partition& p, const Partition& given, const Distribution& mu) {
  if (p.num_states() != given.num_states()) {
    throw InputError("partitions live on different state spaces");
  }
  return conditional_entropy(p, std::span<const Event>(given.blocks()), mu);
}

double mutual_information(const Partition& p, const Partition& q, const Distribution& mu) {
  require_size(p, mu);
  require_size(q, mu);
  KahanSum acc;
  for (const auto& a : p.blocks()) {
    const double ma = mu.mass(a);
    for (const auto& b : q.blocks()) {
      const double mab = mu.mass(a & b);
      if (!(mab > 0.0)) continue;
      acc.add(mab * std::log(mab / (ma * mu.mass(b))));
    }
  }
  return std::max(0.0, acc.value());
}

LearningStrategy::LearningStrategy(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw InputError("a learning strategy needs at least one step");
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (!(steps_[i].multiplier > 0.0)) throw InputError("step multiplier must be positive");
    if (steps_[i].partition.num_states() != steps_.front().partition.num_states()) {
      throw InputError("strategy steps on different state spaces");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (steps_[i].partition == steps_[j].partition) {
        throw InputError("a learning strategy may not repeat a partition");
      }
    }
  }
}

double strategy_cost(const LearningStrategy& s, const Distribution& mu) {
  const auto n = s.steps().front().partition.num_states();
  std::vector<Partition> asked;
  KahanSum cost;
  for (const auto& step : s.steps()) {
    const auto cells = refine_cells(n, asked);
    cost.add(step.multiplier * conditional_entropy(step.partition, cells, mu));
    asked.push_back(step.partition);
  }
  return cost.value();
}

double total_uncertainty(const LayeredStructure& layers, const Distribution& mu) {
  const auto n = layers.num_states();
  std::vector<Partition> cheaper;
  KahanSum total;
  for (const auto& layer : layers.layers()) {
    const auto cells = refine_cells(n, cheaper);
    total.add(layer.multiplier * conditional_entropy(layer.partition, cells, mu));
    cheaper.push_back(layer.partition);
  }
  return total.value();
}

double policy_cost(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem) {
  const auto agg = aggregate_states(state_probs, problem);
  const auto& levels = problem.levels();
  const auto& mu = problem.prior();
  KahanSum cost;
  // Layer terms: -weight_k * E[sum_n Pr(n|cell) ln Pr(n|cell)].
  for (std::size_t k = 0; k < levels.size(); ++k) {
    for (std::size_t c = 0; c < levels[k].cells.size(); ++c) {
      const double m = levels[k].mass[c];
      if (!(m > 0.0)) continue;
      for (Eigen::Index n = 0; n < state_probs.rows(); ++n) {
        cost.add(-levels[k].weight * m * plogp(agg.levels[k](n, static_cast<Eigen::Index>(c))));
      }
    }
  }
  for (std::size_t s = 0; s < problem.num_states(); ++s) {
    if (!(mu[s] > 0.0)) continue;
    for (Eigen::Index n = 0; n < state_probs.rows(); ++n) {
      cost.add(mu[s] * plogp(state_probs(n, static_cast<Eigen::Index>(s))));
    }
  }
  return problem.top_multiplier() * cost.value();
}

double policy_cost(const Policy& policy, const ChoiceProblem& problem, double consistency_tol) {
  const Eigen::MatrixXd implied = deep_from_states(policy.state_probs, problem);
  if (implied.rows() != policy.x.rows() || implied.cols() != policy.x.cols()) {
    throw InconsistentPolicy("policy shape does not match the problem");
  }
  const double gap = (implied - policy.x).cwiseAbs().maxCoeff();
  if (gap > consistency_tol) {
    throw InconsistentPolicy("deep-cell probabilities differ from the per-state aggregate by " +
                             std::to_string(gap));
  }
  return policy_cost(policy.state_probs, problem);
}

double expected_payoff(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem) {
  KahanSum acc;
  for (std::size_t s = 0; s < problem.num_states(); ++s) {
    for (Eigen::Index n = 0; n < state_probs.rows(); ++n) {
      acc.add(problem.prior()[s] * state_probs(n, static_cast<Eigen::Index>(s)) *
              problem.payoff(static_cast<std::size_t>(n), s));
    }
  }
  return acc.value();
}

}  // namespace msse
