#include "msse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msse/distribution.hpp"

namespace msse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;
constexpr double kMaxRate = 1e12;
constexpr double kMinRate = 1e-30;

struct Evaluation {
  double value = 0.0;
  Aggregates agg;
  Eigen::MatrixXd probs;   // N x S
  Eigen::MatrixXd grad;    // N x deep
  Eigen::MatrixXd target;  // deep aggregate of probs
  bool ok = true;
};

// One pass: objective, per-state choice probabilities, gradient, and the
// deep-cell re-aggregation used by the fixed-point update.
Evaluation evaluate(const Eigen::MatrixXd& x, const ChoiceProblem& problem) {
  const auto& levels = problem.levels();
  const auto& mu = problem.prior().probs();
  const double top = problem.top_multiplier();
  const auto N = static_cast<Eigen::Index>(problem.num_options());
  const auto S = problem.num_states();

  Evaluation e;
  e.agg = aggregate_deep(x, problem);
  e.probs.resize(N, static_cast<Eigen::Index>(S));
  KahanSum total;
  Eigen::VectorXd score(N);
  for (std::size_t s = 0; s < S; ++s) {
    double best = kNegInf;
    for (Eigen::Index n = 0; n < N; ++n) {
      double sc = problem.payoff(static_cast<std::size_t>(n), s) / top;
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const double a = e.agg.levels[k](n, static_cast<Eigen::Index>(levels[k].of_state[s]));
        if (!(a > 0.0)) {
          sc = kNegInf;
          break;
        }
        sc += levels[k].weight * std::log(a);
      }
      score(n) = sc;
      best = std::max(best, sc);
    }
    if (best == kNegInf) {
      e.ok = false;
      e.value = kNegInf;
      return e;
    }
    double z = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double w = score(n) == kNegInf ? 0.0 : std::exp(score(n) - best);
      e.probs(n, static_cast<Eigen::Index>(s)) = w;
      z += w;
    }
    e.probs.col(static_cast<Eigen::Index>(s)) /= z;
    total.add(mu[s] * (best + std::log(z)));
  }
  e.value = top * total.value();

  const Aggregates r = aggregate_states(e.probs, problem);
  const auto& deep = problem.deep();
  const auto D = static_cast<Eigen::Index>(deep.cells.size());
  e.grad = Eigen::MatrixXd::Zero(N, D);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    for (Eigen::Index b = 0; b < D; ++b) {
      const auto c = static_cast<Eigen::Index>(levels[k].of_deep[static_cast<std::size_t>(b)]);
      for (Eigen::Index n = 0; n < N; ++n) {
        const double a = e.agg.levels[k](n, c);
        if (a > 0.0) e.grad(n, b) += levels[k].weight * r.levels[k](n, c) / a;
      }
    }
  }
  for (Eigen::Index b = 0; b < D; ++b) {
    e.grad.col(b) *= top * deep.mass[static_cast<std::size_t>(b)];
  }
  e.target = r.levels.back();
  return e;
}

// Largest |x - target| over deep cells that carry mass.
double residual_of(const Eigen::MatrixXd& x, const Evaluation& e, const ChoiceProblem& problem) {
  const auto& mass = problem.deep().mass;
  double worst = 0.0;
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    if (!(mass[static_cast<std::size_t>(b)] > 0.0)) continue;
    worst = std::max(worst, (x.col(b) - e.target.col(b)).cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::MatrixXd propose(const Eigen::MatrixXd& x, const Evaluation& e, const ChoiceProblem& problem,
                        const std::vector<bool>& in_support, Method method, double rate) {
  const auto& mass = problem.deep().mass;
  Eigen::MatrixXd out = x;
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    const double m = mass[static_cast<std::size_t>(b)];
    if (!(m > 0.0)) continue;
    if (method == Method::FixedPoint) {
      out.col(b) = x.col(b) + rate * (e.target.col(b) - x.col(b));
      continue;
    }
    // Scale-free gradient: equals one on the support at an interior optimum.
    const double scale = problem.top_multiplier() * m;
    double top = kNegInf;
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
      if (in_support[static_cast<std::size_t>(n)]) top = std::max(top, e.grad(n, b) / scale);
    }
    double z = 0.0;
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
      if (!in_support[static_cast<std::size_t>(n)]) {
        out(n, b) = 0.0;
        continue;
      }
      out(n, b) = x(n, b) * std::exp(rate * (e.grad(n, b) / scale - top));
      z += out(n, b);
    }
    out.col(b) /= z;
  }
  return out;
}

struct RunResult {
  Eigen::MatrixXd x;
  Evaluation eval;
  std::vector<bool> support;
  std::size_t iterations = 0;
  bool converged = false;
};

Eigen::VectorXd unconditional(const Eigen::MatrixXd& x, const ChoiceProblem& problem) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  const auto& mass = problem.deep().mass;
  for (Eigen::Index b = 0; b < x.cols(); ++b) out += mass[static_cast<std::size_t>(b)] * x.col(b);
  return out;
}

void restrict_to(Eigen::MatrixXd& x, const std::vector<bool>& support) {
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    if (!support[static_cast<std::size_t>(n)]) x.row(n).setZero();
  }
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    const double z = x.col(b).sum();
    if (z > 0.0) x.col(b) /= z;
  }
}

RunResult ascend(Eigen::MatrixXd x, std::vector<bool> support, const ChoiceProblem& problem,
                 const SolverOptions& opt, std::size_t budget, std::vector<double>* trace) {
  RunResult out;
  restrict_to(x, support);
  Evaluation e = evaluate(x, problem);
  if (!e.ok) throw InadmissibleAggregates("starting policy leaves a state without options");
  if (trace) trace->push_back(e.value);

  const double base_rate = opt.method == Method::FixedPoint ? opt.damping : 1.0;
  double rate = base_rate;
  double last_step = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < budget; ++it) {
    const double res = residual_of(x, e, problem);
    if (res < opt.residual_tol && last_step < opt.step_tol) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    Eigen::MatrixXd cand;
    Evaluation ce;
    double step = 0.0;
    while (rate >= kMinRate) {
      cand = propose(x, e, problem, support, opt.method, rate);
      const Eigen::MatrixXd d = cand - x;
      step = d.cwiseAbs().maxCoeff();
      if (step == 0.0) break;
      ce = evaluate(cand, problem);
      if (ce.ok) {
        const double dd = (e.grad.array() * d.array()).sum();
        // Either sufficient increase, or the gradient at the candidate still
        // points along the step, which by concavity means no decrease. The
        // gradient is not finite where an entry has just underflowed to zero,
        // so that second test needs the candidate to keep x's support.
        const bool same_face = ((x.array() > 0.0) <= (cand.array() > 0.0)).all();
        if (ce.value >= e.value + kArmijo * dd ||
            (same_face && (ce.grad.array() * d.array()).sum() >= 0.0)) {
          accepted = true;
          break;
        }
      }
      rate *= 0.5;
    }
    if (!accepted) {
      out.converged = res < opt.residual_tol;
      break;
    }
    x = std::move(cand);
    e = std::move(ce);
    last_step = step;
    if (trace) trace->push_back(e.value);
    rate = opt.method == Method::FixedPoint ? base_rate : std::min(rate * 2.0, kMaxRate);

    const Eigen::VectorXd pr = unconditional(x, problem);
    bool pruned = false;
    std::size_t alive = static_cast<std::size_t>(std::count(support.begin(), support.end(), true));
    for (Eigen::Index n = 0; n < x.rows() && alive > 1; ++n) {
      if (support[static_cast<std::size_t>(n)] && pr(n) < opt.prune_threshold) {
        support[static_cast<std::size_t>(n)] = false;
        --alive;
        pruned = true;
      }
    }
    if (pruned) {
      restrict_to(x, support);
      e = evaluate(x, problem);
      if (!e.ok) throw InadmissibleAggregates("pruning left a state without options");
      rate = base_rate;
      last_step = std::numeric_limits<double>::infinity();
    }
  }
  out.iterations = it;
  out.x = std::move(x);
  out.eval = std::move(e);
  out.support = std::move(support);
  return out;
}

}  // namespace

std::string to_string(Method m) {
  return m == Method::FixedPoint ? "fixed-point" : "eg";
}

Method parse_method(const std::string& name) {
  if (name == "eg" || name == "exponentiated-gradient") return Method::ExponentiatedGradient;
  if (name == "fixed-point" || name == "fp") return Method::FixedPoint;
  throw InputError("unknown solver method '" + name + "' (expected eg or fixed-point)");
}

double corollary_objective(const Eigen::MatrixXd& x, const ChoiceProblem& problem) {
  return evaluate(x, problem).value;
}

Eigen::MatrixXd corollary_gradient(const Eigen::MatrixXd& x, const ChoiceProblem& problem) {
  Evaluation e = evaluate(x, problem);
  if (!e.ok) throw InadmissibleAggregates("gradient undefined: a state has no option");
  return e.grad;
}

Solution solve(const ChoiceProblem& problem, const SolverOptions& opt) {
  if (!(opt.step_tol > 0.0) || !(opt.residual_tol > 0.0)) {
    throw InputError("solver tolerances must be positive");
  }
  if (opt.max_iter == 0) throw InputError("max_iter must be positive");
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw InputError("damping must be in (0, 1]");

  const auto N = problem.num_options();
  std::vector<double> trace;
  std::vector<double>* tp = opt.record_trace ? &trace : nullptr;
  std::vector<std::size_t> restarts;

  RunResult run = ascend(uniform_deep(problem), std::vector<bool>(N, true), problem, opt,
                         opt.max_iter, tp);
  std::size_t used = run.iterations;

  // Options dropped during the ascent get one chance to come back: re-solve
  // with a little mass on them and keep the result only if it does better.
  bool changed = true;
  while (changed && used < opt.max_iter) {
    changed = false;
    for (std::size_t n = 0; n < N && used < opt.max_iter; ++n) {
      if (run.support[n]) continue;
      std::vector<bool> trial_support = run.support;
      trial_support[n] = true;
      Eigen::MatrixXd start = (1.0 - opt.reintroduce_mass) * run.x;
      start.row(static_cast<Eigen::Index>(n)).array() += opt.reintroduce_mass;
      std::vector<double> trial_trace;
      RunResult trial = ascend(start, trial_support, problem, opt, opt.max_iter - used,
                               tp ? &trial_trace : nullptr);
      used += trial.iterations;
      const double gain = trial.eval.value - run.eval.value;
      if (trial.support[n] && gain > 1e-12 * (1.0 + std::abs(run.eval.value))) {
        run = std::move(trial);
        if (tp) {
          restarts.push_back(trace.size());
          trace.insert(trace.end(), trial_trace.begin(), trial_trace.end());
        }
        changed = true;
        break;
      }
    }
  }

  Solution sol;
  sol.method = opt.method;
  sol.iterations = used;
  sol.objective = run.eval.value;
  sol.converged = run.converged;
  for (std::size_t n = 0; n < N; ++n) {
    if (run.support[n]) sol.support.push_back(n);
  }
  sol.policy = make_policy(std::move(run.x), problem);
  sol.residual = verify_fixed_point(sol.policy, problem).worst();
  sol.trace = std::move(trace);
  sol.trace_restarts = std::move(restarts);
  return sol;
}

FixedPointReport verify_fixed_point(const Policy& policy, const ChoiceProblem& problem) {
  FixedPointReport rep;
  const Aggregates from_states = aggregate_states(policy.state_probs, problem);
  try {
    const Eigen::MatrixXd implied = state_choice_probs(from_states, problem);
    rep.choice_residual = (policy.state_probs - implied).cwiseAbs().maxCoeff();
  } catch (const InadmissibleAggregates&) {
    rep.choice_residual = std::numeric_limits<double>::infinity();
  }
  if (policy.aggregates.levels.size() != from_states.levels.size()) {
    rep.aggregation_residual = std::numeric_limits<double>::infinity();
    return rep;
  }
  for (std::size_t k = 0; k < from_states.levels.size(); ++k) {
    rep.aggregation_residual =
        std::max(rep.aggregation_residual,
                 (policy.aggregates.levels[k] - from_states.levels[k]).cwiseAbs().maxCoeff());
  }
  return rep;
}

std::vector<BiasEntry> ru_bias(const Solution& solution, const ChoiceProblem& problem) {
  const auto& levels = problem.levels();
  const auto& agg = solution.policy.aggregates;
  const double top = problem.top_multiplier();
  const double N = static_cast<double>(problem.num_options());
  std::vector<BiasEntry> out;
  for (std::size_t n = 0; n < problem.num_options(); ++n) {
    for (std::size_t s = 0; s < problem.num_states(); ++s) {
      BiasEntry b;
      b.option = n;
      b.state = s;
      b.v_true = problem.payoff(n, s);
      b.v_scaled = b.v_true / top;
      double alpha = 0.0;
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const double a = agg.levels[k](static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(levels[k].of_state[s]));
        if (!(a > 0.0)) {
          alpha = kNegInf;
          break;
        }
        alpha += levels[k].weight * std::log(N * a);
      }
      b.alpha = alpha;
      b.bias_payoff = top * alpha;
      out.push_back(b);
    }
  }
  return out;
}

}  // namespace msse
