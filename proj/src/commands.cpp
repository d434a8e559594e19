#include "msse/commands.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "msse/information.hpp"
#include "msse/logit_fit.hpp"
#include "msse/oracle.hpp"
#include "msse/problem_io.hpp"
#include "msse/sweep.hpp"

namespace msse {

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

ChoiceProblem load(const CommandArgs& args, std::ostream& err) {
  if (args.problem_path.empty()) throw InputError("--problem is required");
  ParsedProblem parsed = parse_problem(args.problem_path);
  for (const auto& w : parsed.warnings) err << "warning: " << w << '\n';
  return std::move(parsed.problem);
}

void report_unconverged(const Solution& sol, std::ostream& err) {
  err << "error: solver did not converge after " << sol.iterations
      << " iterations (fixed-point residual " << csv_number(sol.residual)
      << "); best iterate reported\n";
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

}  // namespace

std::vector<Draw> read_choices(const std::string& path, const ChoiceProblem& problem) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open choice data");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "state,option") {
    throw InputError(path + ": line 1: expected header state,option");
  }
  std::vector<Draw> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw InputError(path + ": line " + std::to_string(lineno) + ": expected two fields");
    }
    Draw d;
    try {
      d.state = problem.space().index_of(trim(line.substr(0, comma)));
      d.option = problem.option_index(trim(line.substr(comma + 1)));
    } catch (const InputError& e) {
      throw InputError(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(d);
  }
  if (out.empty()) throw InputError(path + ": no choice records");
  return out;
}

int cmd_solve(const CommandArgs& args, std::ostream& out, std::ostream& err) {
  const ChoiceProblem problem = load(args, err);
  const Solution sol = solve(problem, args.solver);
  const auto& P = sol.policy.state_probs;
  out << "state,option,prob,value\n";
  for (std::size_t s = 0; s < problem.num_states(); ++s) {
    for (std::size_t n = 0; n < problem.num_options(); ++n) {
      out << problem.space().label(s) << ',' << problem.options()[n] << ','
          << csv_number(P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s))) << ','
          << csv_number(problem.payoff(n, s)) << '\n';
    }
  }
  const Eigen::VectorXd pr = sol.policy.unconditional();
  out << "\noption,uncond_prob\n";
  for (std::size_t n = 0; n < problem.num_options(); ++n) {
    out << problem.options()[n] << ',' << csv_number(pr(static_cast<Eigen::Index>(n))) << '\n';
  }
  out << "\nobjective,residual,iterations\n"
      << csv_number(sol.objective) << ',' << csv_number(sol.residual) << ',' << sol.iterations << '\n';
  if (!sol.converged) {
    report_unconverged(sol, err);
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_sweep(const CommandArgs& args, std::ostream& out, std::ostream& err) {
  const ChoiceProblem problem = load(args, err);
  SweepSpec spec;
  spec.group = parse_group(args.param);
  spec.from = args.from;
  spec.to = args.to;
  spec.steps = args.steps;
  spec.scale = parse_scale(args.scale);
  const auto points = run_sweep(problem, spec, args.solver);
  out << "lambda_value,state,option,prob\n";
  int code = kExitOk;
  for (const auto& pt : points) {
    const auto& P = pt.solution.policy.state_probs;
    for (std::size_t s = 0; s < problem.num_states(); ++s) {
      for (std::size_t n = 0; n < problem.num_options(); ++n) {
        out << csv_number(pt.value) << ',' << problem.space().label(s) << ','
            << problem.options()[n] << ','
            << csv_number(P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s))) << '\n';
      }
    }
    if (!pt.solution.converged) {
      err << "error: sweep point " << csv_number(pt.value) << " did not converge\n";
      code = kExitNoConvergence;
    }
  }
  return code;
}

int cmd_bias(const CommandArgs& args, std::ostream& out, std::ostream& err) {
  const ChoiceProblem problem = load(args, err);
  const Solution sol = solve(problem, args.solver);
  out << "option,state,v_true,alpha,bias_payoff_units\n";
  for (const auto& b : ru_bias(sol, problem)) {
    out << problem.options()[b.option] << ',' << problem.space().label(b.state) << ','
        << csv_number(b.v_true) << ',' << csv_number(b.alpha) << ',' << csv_number(b.bias_payoff)
        << '\n';
  }
  if (!sol.converged) {
    report_unconverged(sol, err);
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_simulate(const CommandArgs& args, std::ostream& out, std::ostream& err) {
  const ChoiceProblem problem = load(args, err);
  if (args.draws == 0) throw InputError("--draws must be at least 1");
  const Solution sol = solve(problem, args.solver);
  if (!sol.converged) {
    report_unconverged(sol, err);
    return kExitNoConvergence;
  }
  const auto draws = simulate(problem, sol.policy.state_probs, args.draws, args.seed);
  std::string buf = "state,option\n";
  for (const auto& d : draws) {
    buf += problem.space().label(d.state);
    buf += ',';
    buf += problem.options()[d.option];
    buf += '\n';
  }
  out << buf;
  return kExitOk;
}

int cmd_fit(const CommandArgs& args, std::ostream& out, std::ostream& err) {
  const ChoiceProblem problem = load(args, err);
  if (args.choices_path.empty()) throw InputError("--choices is required");
  const auto draws = read_choices(args.choices_path, problem);
  const FitResult fit = fit_logit(value_design(problem), count_choices(draws, problem));
  out << "parameter,estimate,std_error\n";
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out << fit.names[j] << ',' << csv_number(fit.estimate(jj)) << ','
        << csv_number(fit.std_error(jj)) << '\n';
  }
  out << "\nlog_likelihood,observations,iterations\n"
      << csv_number(fit.log_likelihood) << ',' << csv_number(fit.observations) << ','
      << fit.iterations << '\n';
  if (!fit.converged) {
    err << "error: logit fit did not converge\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_verify(const CommandArgs& args, std::ostream& out, std::ostream& err) {
  const ChoiceProblem problem = load(args, err);
  const OracleConfig config;
  bool failed = false;
  out << "check,status,detail\n";
  auto emit = [&](const std::string& check, bool pass, const std::string& detail) {
    out << check << ',' << (pass ? "pass" : "fail") << ',' << detail << '\n';
    failed = failed || !pass;
  };
  auto skip = [&](const std::string& check, const std::string& why) {
    out << check << ",skip," << why << '\n';
    err << "notice: " << check << " skipped: " << why << '\n';
  };

  try {
    const auto best = min_strategy_cost(problem.sources(), problem.prior(), config);
    const double tu = total_uncertainty(problem.layers(), problem.prior());
    const double gap = std::abs(best.cost - tu);
    emit("strategy_enumeration", gap <= 1e-10, "gap " + csv_number(gap));
  } catch (const OracleCapExceeded& e) {
    skip("strategy_enumeration", e.what());
  }

  const Solution sol = solve(problem, args.solver);
  emit("solver_converged", sol.converged, std::to_string(sol.iterations) + " iterations");
  emit("fixed_point_residual", sol.residual < 1e-8, "residual " + csv_number(sol.residual));

  const double eq7 = expected_payoff(sol.policy.state_probs, problem) -
                     policy_cost(sol.policy.state_probs, problem);
  const double id_gap = std::abs(eq7 - sol.objective);
  emit("objective_identity", id_gap < 1e-8, "gap " + csv_number(id_gap));

  try {
    const auto grid = grid_solve(problem, config);
    const double gap = std::abs(grid.objective - sol.objective);
    emit("grid_oracle", gap < 1e-5, "gap " + csv_number(gap));
  } catch (const OracleCapExceeded& e) {
    skip("grid_oracle", e.what());
  }
  try {
    const auto direct = direct_policy_solve(problem, config);
    const double gap = std::abs(direct.objective - sol.objective);
    emit("direct_policy_oracle", gap < 1e-5, "gap " + csv_number(gap));
  } catch (const OracleCapExceeded& e) {
    skip("direct_policy_oracle", e.what());
  }

  std::mt19937_64 gen(args.seed);
  const auto N = static_cast<Eigen::Index>(problem.num_options());
  const auto D = static_cast<Eigen::Index>(problem.num_deep_cells());
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x(N, D);
    for (Eigen::Index b = 0; b < D; ++b) {
      for (Eigen::Index n = 0; n < N; ++n) x(n, b) = -std::log(1.0 - unit_uniform(gen));
      x.col(b) = 0.5 * x.col(b) / x.col(b).sum() + Eigen::VectorXd::Constant(N, 0.5 / static_cast<double>(N));
    }
    Eigen::MatrixXd analytic = corollary_gradient(x, problem);
    for (Eigen::Index b = 0; b < D; ++b) analytic.col(b).array() -= analytic.col(b).mean();
    const Eigen::MatrixXd fd = finite_diff_grad(
        [&problem](const Eigen::MatrixXd& y) { return corollary_objective(y, problem); }, x, 1e-6);
    const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
    worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff() / scale);
  }
  emit("gradient_check", worst < 1e-5, "max relative error " + csv_number(worst));

  return failed ? kExitNoConvergence : kExitOk;
}

int run_command(const std::string& name, const CommandArgs& args, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "solve") return cmd_solve(args, out, err);
    if (name == "sweep") return cmd_sweep(args, out, err);
    if (name == "bias") return cmd_bias(args, out, err);
    if (name == "simulate") return cmd_simulate(args, out, err);
    if (name == "fit") return cmd_fit(args, out, err);
    if (name == "verify") return cmd_verify(args, out, err);
    err << "error: unknown command '" << name << "'\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace msse
