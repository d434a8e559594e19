#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "msse/execution.hpp"
#include "msse/problem.hpp"
#include "msse/solver.hpp"

namespace msse {

enum class SweepScale { Linear, Log };

SweepScale parse_scale(const std::string& name);

/// Vary the multiplier shared by one group of sources. Groups are numbered
/// from 0 in increasing multiplier order over all of the problem's sources.
struct SweepSpec {
  std::size_t group = 0;
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 2;
  SweepScale scale = SweepScale::Linear;
};

/// Accepts "lambda1", "lambda2", ... (1-based) or a bare 0-based index.
std::size_t parse_group(const std::string& name);

/// Distinct multipliers of the problem's sources, ascending.
std::vector<double> multiplier_groups(const ChoiceProblem& problem);

/// Grid points from `from` to `to` inclusive; a single point needs from == to.
std::vector<double> sweep_values(const SweepSpec& spec);

/// The same problem with every source of `group` repriced to `value`. Layers
/// are rebuilt, so crossing another group's multiplier merges layers.
ChoiceProblem with_group_multiplier(const ChoiceProblem& problem, std::size_t group, double value);

struct SweepPoint {
  double value = 0.0;
  std::optional<ChoiceProblem> problem;  // always set by run_sweep
  Solution solution;
};

/// One independent solve per grid point, in grid order regardless of `exec`.
std::vector<SweepPoint> run_sweep(const ChoiceProblem& problem, const SweepSpec& spec,
                                  const SolverOptions& options = {},
                                  Execution exec = Execution::Parallel);

}  // namespace msse
