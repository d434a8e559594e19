#include "msse/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace msse {

SweepScale parse_scale(const std::string& name) {
  if (name == "linear") return SweepScale::Linear;
  if (name == "log") return SweepScale::Log;
  throw InputError("unknown sweep scale '" + name + "' (expected linear or log)");
}

std::size_t parse_group(const std::string& name) {
  std::string digits = name;
  bool one_based = false;
  if (name.rfind("lambda", 0) == 0) {
    digits = name.substr(6);
    one_based = true;
  }
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw InputError("sweep parameter '" + name + "' is not lambda<k> or an index");
  }
  const std::size_t k = std::stoul(digits);
  if (one_based) {
    if (k == 0) throw InputError("sweep parameter numbering starts at lambda1");
    return k - 1;
  }
  return k;
}

std::vector<double> multiplier_groups(const ChoiceProblem& problem) {
  std::vector<double> ms;
  for (const auto& src : problem.sources()) ms.push_back(src.multiplier);
  std::sort(ms.begin(), ms.end());
  std::vector<double> out;
  for (double m : ms) {
    if (out.empty() || !same_multiplier(out.back(), m)) out.push_back(m);
  }
  return out;
}

std::vector<double> sweep_values(const SweepSpec& spec) {
  if (!(spec.from > 0.0) || !(spec.to > 0.0) || !std::isfinite(spec.to)) {
    throw InputError("sweep bounds must be positive and finite");
  }
  if (spec.from > spec.to) throw InputError("sweep needs from <= to");
  if (spec.steps == 0) throw InputError("sweep needs at least one step");
  if (spec.steps == 1) {
    if (spec.from != spec.to) throw InputError("a single-step sweep needs from == to");
    return {spec.from};
  }
  std::vector<double> out(spec.steps);
  const double last = static_cast<double>(spec.steps - 1);
  for (std::size_t i = 0; i < spec.steps; ++i) {
    const double t = static_cast<double>(i) / last;
    if (spec.scale == SweepScale::Linear) {
      out[i] = spec.from + t * (spec.to - spec.from);
    } else {
      out[i] = std::exp(std::log(spec.from) + t * (std::log(spec.to) - std::log(spec.from)));
    }
  }
  out.front() = spec.from;
  out.back() = spec.to;
  return out;
}

ChoiceProblem with_group_multiplier(const ChoiceProblem& problem, std::size_t group, double value) {
  const auto groups = multiplier_groups(problem);
  if (group >= groups.size()) {
    throw InputError("sweep group " + std::to_string(group + 1) + " does not exist (problem has " +
                     std::to_string(groups.size()) + ")");
  }
  std::vector<InfoSource> sources;
  for (const auto& src : problem.sources()) {
    const bool hit = same_multiplier(src.multiplier, groups[group]);
    sources.emplace_back(src.partition, hit ? value : src.multiplier);
  }
  return ChoiceProblem(problem.space(), problem.prior(), problem.options(), problem.payoffs(),
                       std::move(sources));
}

std::vector<SweepPoint> run_sweep(const ChoiceProblem& problem, const SweepSpec& spec,
                                  const SolverOptions& options, Execution exec) {
  const auto values = sweep_values(spec);
  if (spec.group >= multiplier_groups(problem).size()) {
    // Surface the bad group before spawning work.
    (void)with_group_multiplier(problem, spec.group, values.front());
  }
  std::vector<SweepPoint> out(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  const auto count = static_cast<long>(values.size());

  auto work = [&](long i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      out[u].value = values[u];
      out[u].problem.emplace(with_group_multiplier(problem, spec.group, values[u]));
      out[u].solution = solve(*out[u].problem, options);
    } catch (...) {
      errors[u] = std::current_exception();
    }
  };

  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
    for (long i = 0; i < count; ++i) work(i);
  } else {
    for (long i = 0; i < count; ++i) work(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace msse
