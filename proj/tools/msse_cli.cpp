#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "msse/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rational inattention with layered Shannon costs: solve, sweep, bias, simulate, fit, verify"};
  app.require_subcommand(1);

  msse::CommandArgs args;
  std::string out_path;
  std::string method = "eg";

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--problem", args.problem_path, "problem file (JSON)")->required();
    cmd->add_option("--tol", args.solver.step_tol, "step tolerance for the solver");
    cmd->add_option("--max-iter", args.solver.max_iter, "iteration limit for the solver");
    cmd->add_option("--method", method, "eg or fixed-point");
    cmd->add_option("--out", out_path, "write CSV here instead of standard output");
  };

  auto* solve = app.add_subcommand("solve", "optimal choice probabilities");
  common(solve);
  auto* sweep = app.add_subcommand("sweep", "solve over a range of one multiplier group");
  common(sweep);
  sweep->add_option("--param", args.param, "lambda1, lambda2, ... (groups in increasing order)");
  sweep->add_option("--from", args.from, "first value")->required();
  sweep->add_option("--to", args.to, "last value")->required();
  sweep->add_option("--steps", args.steps, "number of grid points");
  sweep->add_option("--scale", args.scale, "linear or log");
  auto* bias = app.add_subcommand("bias", "random-utility bias table");
  common(bias);
  auto* sim = app.add_subcommand("simulate", "draw (state, choice) pairs from the solution");
  common(sim);
  sim->add_option("--draws", args.draws, "number of draws");
  sim->add_option("--seed", args.seed, "seed for mt19937_64");
  auto* fit = app.add_subcommand("fit", "conditional-logit fit of choice data");
  common(fit);
  fit->add_option("--choices", args.choices_path, "CSV with header state,option")->required();
  auto* verify = app.add_subcommand("verify", "check the solver against brute-force references");
  common(verify);
  verify->add_option("--seed", args.seed, "seed for the gradient probe points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : msse::kExitInput;
  }

  try {
    args.solver.method = msse::parse_method(method);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return msse::kExitInput;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (out_path.empty()) {
    return msse::run_command(name, args, std::cout, std::cerr);
  }
  std::ostringstream buf;
  const int code = msse::run_command(name, args, buf, std::cerr);
  std::ofstream file(out_path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot write " << out_path << '\n';
    return msse::kExitInput;
  }
  file << buf.str();
  return code;
}
