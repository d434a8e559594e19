#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "msse/problem.hpp"

namespace msse {

/// A problem file after validation. `warnings` lists sources that were priced
/// above the last needed layer and therefore dropped.
struct ParsedProblem {
  ChoiceProblem problem;
  std::vector<std::string> warnings;
};

/// JSON problem text:
///   {"states": [...], "prior": [...],
///    "options": [{"name": ..., "payoffs": [...]}, ...],
///    "sources": [{"blocks": [[...], [...]], "multiplier": ...}, ...]}
/// plus an optional "description" string. Errors name the offending field as
/// a JSON pointer, or the line and column for malformed JSON.
ParsedProblem parse_problem_text(const std::string& text, const std::string& origin = "<input>");

ParsedProblem parse_problem(const std::string& path);

/// Canonical JSON for `problem`, sources in their original order. Reading it
/// back gives an equal ChoiceProblem.
void write_problem(const ChoiceProblem& problem, std::ostream& out);

}  // namespace msse
