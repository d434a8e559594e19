#include "msse/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace msse {

namespace {

using nlohmann::json;

class Reader {
public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw InputError(origin_ + ": " + where + ": " + what);
  }

  const json& field(const json& obj, const std::string& where, const char* key) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
    return *it;
  }

  const json& array(const json& obj, const std::string& where, const char* key) const {
    const json& v = field(obj, where, key);
    if (!v.is_array()) fail(where + "/" + key, "expected an array");
    return v;
  }

  double number(const json& v, const std::string& where) const {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "expected a finite number");
    return d;
  }

  std::string text(const json& v, const std::string& where) const {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
  }

private:
  std::string origin_;
};

}  // namespace

ParsedProblem parse_problem_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": malformed JSON: " + e.what());
  }
  const Reader r(origin);
  if (!doc.is_object()) r.fail("/", "expected an object at the top level");
  static const std::set<std::string> known{"states", "prior", "options", "sources", "description"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) r.fail("/" + key, "unknown field");
  }
  if (doc.contains("description")) r.text(doc["description"], "/description");

  const json& states_js = r.array(doc, "/", "states");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < states_js.size(); ++i) {
    labels.push_back(r.text(states_js[i], "/states/" + std::to_string(i)));
  }
  std::optional<StateSpace> space;
  try {
    space.emplace(labels);
  } catch (const InputError& e) {
    r.fail("/states", e.what());
  }
  const std::size_t S = space->size();

  const json& prior_js = r.array(doc, "/", "prior");
  if (prior_js.size() != S) {
    r.fail("/prior", "has " + std::to_string(prior_js.size()) + " entries for " + std::to_string(S) +
                         " states");
  }
  std::vector<double> weights;
  double total = 0.0;
  for (std::size_t i = 0; i < S; ++i) {
    const std::string where = "/prior/" + std::to_string(i);
    const double w = r.number(prior_js[i], where);
    if (w < 0.0) r.fail(where, "prior probabilities must be non-negative");
    weights.push_back(w);
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "prior sums to " << total << ", not 1 (tolerance 1e-9)";
    r.fail("/prior", msg.str());
  }
  Distribution prior = Distribution::normalized(std::move(weights));

  const json& options_js = r.array(doc, "/", "options");
  std::vector<std::string> names;
  Eigen::MatrixXd payoffs(static_cast<Eigen::Index>(options_js.size()), static_cast<Eigen::Index>(S));
  for (std::size_t n = 0; n < options_js.size(); ++n) {
    const std::string where = "/options/" + std::to_string(n);
    const json& opt = options_js[n];
    if (!opt.is_object()) r.fail(where, "expected an object with name and payoffs");
    names.push_back(r.text(r.field(opt, where, "name"), where + "/name"));
    const json& pay = r.array(opt, where, "payoffs");
    if (pay.size() != S) {
      r.fail(where + "/payoffs",
             "has " + std::to_string(pay.size()) + " entries for " + std::to_string(S) + " states");
    }
    for (std::size_t s = 0; s < S; ++s) {
      payoffs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s)) =
          r.number(pay[s], where + "/payoffs/" + std::to_string(s));
    }
  }

  const json& sources_js = r.array(doc, "/", "sources");
  if (sources_js.empty()) r.fail("/sources", "at least one source is required");
  std::vector<InfoSource> sources;
  for (std::size_t i = 0; i < sources_js.size(); ++i) {
    const std::string where = "/sources/" + std::to_string(i);
    const json& src = sources_js[i];
    if (!src.is_object()) r.fail(where, "expected an object with blocks and multiplier");
    const json& blocks = r.array(src, where, "blocks");
    if (blocks.size() != 2) r.fail(where + "/blocks", "a source must have exactly two blocks");
    std::vector<Event> events;
    for (std::size_t b = 0; b < 2; ++b) {
      const std::string bw = where + "/blocks/" + std::to_string(b);
      if (!blocks[b].is_array()) r.fail(bw, "expected an array of state names");
      Event e{0};
      for (std::size_t j = 0; j < blocks[b].size(); ++j) {
        const std::string name = r.text(blocks[b][j], bw + "/" + std::to_string(j));
        std::size_t idx = 0;
        try {
          idx = space->index_of(name);
        } catch (const InputError&) {
          r.fail(bw + "/" + std::to_string(j), "unknown state \"" + name + "\"");
        }
        if (e.contains(idx)) r.fail(bw, "state \"" + name + "\" listed twice");
        e.mask |= Mask{1} << idx;
      }
      events.push_back(e);
    }
    const double mult = r.number(r.field(src, where, "multiplier"), where + "/multiplier");
    try {
      sources.emplace_back(Partition(S, events), mult);
    } catch (const InputError& e) {
      r.fail(where, e.what());
    }
  }

  try {
    ChoiceProblem problem(std::move(*space), std::move(prior), std::move(names), std::move(payoffs),
                          std::move(sources));
    std::vector<std::string> warnings;
    for (const auto& d : problem.discarded_sources()) {
      std::ostringstream w;
      w << "source " << d.partition.to_string() << " at multiplier " << d.multiplier
        << " is not needed to learn the state and was dropped";
      warnings.push_back(w.str());
    }
    return {std::move(problem), std::move(warnings)};
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  }
}

ParsedProblem parse_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open problem file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path);
}

void write_problem(const ChoiceProblem& problem, std::ostream& out) {
  if (problem.sources().empty()) {
    throw InputError("only problems built from sources can be written as problem files");
  }
  nlohmann::ordered_json doc;
  doc["states"] = problem.space().labels();
  doc["prior"] = problem.prior().probs();
  doc["options"] = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < problem.num_options(); ++n) {
    std::vector<double> pay;
    for (std::size_t s = 0; s < problem.num_states(); ++s) pay.push_back(problem.payoff(n, s));
    nlohmann::ordered_json opt;
    opt["name"] = problem.options()[n];
    opt["payoffs"] = pay;
    doc["options"].push_back(opt);
  }
  doc["sources"] = nlohmann::ordered_json::array();
  for (const auto& src : problem.sources()) {
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (const auto& block : src.partition.blocks()) {
      nlohmann::ordered_json names = nlohmann::ordered_json::array();
      for (std::size_t s = 0; s < problem.num_states(); ++s) {
        if (block.contains(s)) names.push_back(problem.space().label(s));
      }
      blocks.push_back(names);
    }
    nlohmann::ordered_json entry;
    entry["blocks"] = blocks;
    entry["multiplier"] = src.multiplier;
    doc["sources"].push_back(entry);
  }
  out << doc.dump(2) << '\n';
}

}  // namespace msse
