#include "msse/logit_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace msse {

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Evaluation {
  double ll = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd neg_hess;
};

Evaluation evaluate(const LogitDesign& design, const Eigen::MatrixXd& counts,
                    const Eigen::VectorXd& beta) {
  const auto N = counts.rows();
  const auto S = counts.cols();
  const auto P = beta.size();
  Evaluation e;
  e.grad = Eigen::VectorXd::Zero(P);
  e.neg_hess = Eigen::MatrixXd::Zero(P, P);
  Eigen::VectorXd u(N), p(N);
  Eigen::MatrixXd X(N, P);
  for (Eigen::Index s = 0; s < S; ++s) {
    const double total = counts.col(s).sum();
    if (!(total > 0.0)) continue;
    X.setZero();
    for (Eigen::Index n = 0; n < N; ++n) {
      const int j = design.param[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)];
      if (j >= 0) X(n, j) = 1.0;
      u(n) = j >= 0 ? beta(j) : 0.0;
    }
    const double top = u.maxCoeff();
    p = (u.array() - top).exp();
    const double z = p.sum();
    p /= z;
    const double lse = top + std::log(z);
    for (Eigen::Index n = 0; n < N; ++n) {
      if (counts(n, s) > 0.0) e.ll += counts(n, s) * (u(n) - lse);
    }
    e.grad += X.transpose() * (counts.col(s) - total * p);
    const Eigen::MatrixXd W = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
    e.neg_hess += total * X.transpose() * W * X;
  }
  return e;
}

}  // namespace

LogitDesign value_design(const ChoiceProblem& problem) {
  const std::size_t N = problem.num_options();
  const std::size_t S = problem.num_states();
  LogitDesign d;
  d.param.assign(N, std::vector<int>(S, -1));
  for (std::size_t n = 0; n < N; ++n) {
    std::vector<double> values;
    for (std::size_t s = 0; s < S; ++s) values.push_back(problem.payoff(n, s));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<int> ids(values.size(), -1);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (n + 1 == N && i == 0) continue;
      ids[i] = static_cast<int>(d.names.size());
      d.names.push_back(problem.options()[n] + "@" + format_value(values[i]));
    }
    for (std::size_t s = 0; s < S; ++s) {
      const auto it = std::find(values.begin(), values.end(), problem.payoff(n, s));
      d.param[n][s] = ids[static_cast<std::size_t>(it - values.begin())];
    }
  }
  return d;
}

Eigen::MatrixXd count_choices(const std::vector<Draw>& draws, const ChoiceProblem& problem) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(problem.num_options()),
                                                 static_cast<Eigen::Index>(problem.num_states()));
  for (const auto& d : draws) {
    if (d.option >= problem.num_options() || d.state >= problem.num_states()) {
      throw InputError("choice record outside the problem's options or states");
    }
    counts(static_cast<Eigen::Index>(d.option), static_cast<Eigen::Index>(d.state)) += 1.0;
  }
  return counts;
}

FitResult fit_logit(const LogitDesign& design, const Eigen::MatrixXd& counts, double grad_tol,
                    std::size_t max_iter) {
  const auto P = static_cast<Eigen::Index>(design.names.size());
  const double obs = counts.sum();
  if (!(obs > 0.0)) throw InputError("no choice data to fit");
  if (P == 0) throw InputError("the logit design has no free parameters");

  std::vector<bool> seen(static_cast<std::size_t>(P), false);
  for (Eigen::Index s = 0; s < counts.cols(); ++s) {
    const double total = counts.col(s).sum();
    if (!(total > 0.0)) continue;
    for (Eigen::Index n = 0; n < counts.rows(); ++n) {
      const int j = design.param[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)];
      if (j >= 0) seen[static_cast<std::size_t>(j)] = true;
      if (counts(n, s) == 0.0 || counts(n, s) == total) {
        throw SeparationError("separation: option " + std::to_string(n + 1) + " is " +
                              (counts(n, s) == 0.0 ? "never" : "always") + " chosen in state " +
                              std::to_string(s + 1) + "; its estimate diverges to " +
                              (counts(n, s) == 0.0 ? "-inf" : "+inf"));
      }
    }
  }
  for (Eigen::Index j = 0; j < P; ++j) {
    if (!seen[static_cast<std::size_t>(j)]) {
      throw InputError("parameter " + design.names[static_cast<std::size_t>(j)] +
                       " appears in no observed state");
    }
  }

  FitResult out;
  out.names = design.names;
  out.observations = obs;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(P);
  Evaluation e = evaluate(design, counts, beta);
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    if (e.grad.cwiseAbs().maxCoeff() / obs < grad_tol) {
      out.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(e.neg_hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw InputError("logit design is not identified by the data");
    }
    const Eigen::VectorXd dir = ldlt.solve(e.grad);
    double t = 1.0;
    bool moved = false;
    while (t > 1e-12) {
      const Eigen::VectorXd cand = beta + t * dir;
      Evaluation ce = evaluate(design, counts, cand);
      if (ce.ll >= e.ll) {
        beta = cand;
        e = std::move(ce);
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  if (!out.converged && e.grad.cwiseAbs().maxCoeff() / obs < grad_tol) out.converged = true;
  out.iterations = it;
  out.estimate = beta;
  out.log_likelihood = e.ll;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(e.neg_hess);
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(P, P));
  out.covariance = cov;
  out.std_error = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace msse
