#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "msse/solver.hpp"
#include "msse/simulate.hpp"

namespace msse {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNoConvergence = 2 };

struct CommandArgs {
  std::string problem_path;
  SolverOptions solver;
  std::uint64_t seed = 1;
  std::size_t draws = 1000;
  std::string param = "lambda1";
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 2;
  std::string scale = "linear";
  std::string choices_path;
};

/// 12 significant digits, as used in every CSV the tool writes.
std::string csv_number(double v);

/// Reads `state,option` records (header required) against the problem's labels.
std::vector<Draw> read_choices(const std::string& path, const ChoiceProblem& problem);

// Each command writes CSV to `out` and diagnostics to `err`, and returns an
// ExitCode. Input problems are reported rather than thrown.
int cmd_solve(const CommandArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandArgs& args, std::ostream& out, std::ostream& err);
int cmd_bias(const CommandArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommandArgs& args, std::ostream& out, std::ostream& err);
int cmd_fit(const CommandArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const CommandArgs& args, std::ostream& out, std::ostream& err);

int run_command(const std::string& name, const CommandArgs& args, std::ostream& out,
                std::ostream& err);

}  // namespace msse
