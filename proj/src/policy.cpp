#include "msse/policy.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace msse {

namespace {

// Average the columns of `fine` into the cells of `level`, weighting by mass;
// cells without mass fall back to the plain mean of their members.
Eigen::MatrixXd coarsen(const Eigen::MatrixXd& fine, const std::vector<double>& fine_mass,
                        const std::vector<std::size_t>& parent, std::size_t num_parents) {
  const auto N = fine.rows();
  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(num_parents));
  Eigen::MatrixXd plain = Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(num_parents));
  std::vector<double> mass(num_parents, 0.0);
  std::vector<double> members(num_parents, 0.0);
  for (Eigen::Index j = 0; j < fine.cols(); ++j) {
    const auto p = static_cast<Eigen::Index>(parent[static_cast<std::size_t>(j)]);
    const double m = fine_mass[static_cast<std::size_t>(j)];
    weighted.col(p) += m * fine.col(j);
    plain.col(p) += fine.col(j);
    mass[static_cast<std::size_t>(p)] += m;
    members[static_cast<std::size_t>(p)] += 1.0;
  }
  for (std::size_t p = 0; p < num_parents; ++p) {
    const auto c = static_cast<Eigen::Index>(p);
    if (mass[p] > 0.0) {
      weighted.col(c) /= mass[p];
    } else {
      weighted.col(c) = plain.col(c) / members[p];
    }
  }
  return weighted;
}

}  // namespace

Aggregates aggregate_deep(const Eigen::MatrixXd& x, const ChoiceProblem& problem) {
  const auto& deep = problem.deep();
  if (x.rows() != static_cast<Eigen::Index>(problem.num_options()) ||
      x.cols() != static_cast<Eigen::Index>(deep.cells.size())) {
    throw InputError("deep-cell policy has the wrong shape");
  }
  Aggregates out;
  for (const auto& level : problem.levels()) {
    if (&level == &deep) {
      out.levels.push_back(x);
    } else {
      out.levels.push_back(coarsen(x, deep.mass, level.of_deep, level.cells.size()));
    }
  }
  return out;
}

Aggregates aggregate_states(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem) {
  if (state_probs.rows() != static_cast<Eigen::Index>(problem.num_options()) ||
      state_probs.cols() != static_cast<Eigen::Index>(problem.num_states())) {
    throw InputError("per-state policy has the wrong shape");
  }
  Aggregates out;
  for (const auto& level : problem.levels()) {
    out.levels.push_back(
        coarsen(state_probs, problem.prior().probs(), level.of_state, level.cells.size()));
  }
  return out;
}

Eigen::MatrixXd deep_from_states(const Eigen::MatrixXd& state_probs, const ChoiceProblem& problem) {
  const auto& deep = problem.deep();
  return coarsen(state_probs, problem.prior().probs(), deep.of_state, deep.cells.size());
}

Eigen::MatrixXd state_choice_probs(const Aggregates& aggregates, const ChoiceProblem& problem) {
  const auto& levels = problem.levels();
  if (aggregates.levels.size() != levels.size()) {
    throw InputError("aggregates do not match the layer depth");
  }
  const auto N = static_cast<Eigen::Index>(problem.num_options());
  const auto S = problem.num_states();
  const double top = problem.top_multiplier();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  Eigen::MatrixXd out(N, static_cast<Eigen::Index>(S));
  Eigen::VectorXd score(N);
  for (std::size_t s = 0; s < S; ++s) {
    double best = kNegInf;
    for (Eigen::Index n = 0; n < N; ++n) {
      double sc = problem.payoff(static_cast<std::size_t>(n), s) / top;
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const double a = aggregates.levels[k](n, static_cast<Eigen::Index>(levels[k].of_state[s]));
        if (!(a > 0.0)) {
          sc = kNegInf;
          break;
        }
        sc += levels[k].weight * std::log(a);
      }
      score(n) = sc;
      if (sc > best) best = sc;
    }
    if (best == kNegInf) {
      throw InadmissibleAggregates("no option has positive weight in state " +
                                   problem.space().label(s));
    }
    double z = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double e = score(n) == kNegInf ? 0.0 : std::exp(score(n) - best);
      out(n, static_cast<Eigen::Index>(s)) = e;
      z += e;
    }
    out.col(static_cast<Eigen::Index>(s)) /= z;
  }
  return out;
}

Policy make_policy(Eigen::MatrixXd x, const ChoiceProblem& problem) {
  Policy p;
  p.deep_cells = problem.deep().cells;
  p.aggregates = aggregate_deep(x, problem);
  p.state_probs = state_choice_probs(p.aggregates, problem);
  p.x = std::move(x);
  return p;
}

Eigen::MatrixXd uniform_deep(const ChoiceProblem& problem) {
  const auto N = static_cast<Eigen::Index>(problem.num_options());
  return Eigen::MatrixXd::Constant(N, static_cast<Eigen::Index>(problem.num_deep_cells()),
                                   1.0 / static_cast<double>(N));
}

}  // namespace msse
