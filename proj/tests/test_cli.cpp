#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "msse/commands.hpp"
#include "msse/logit_fit.hpp"
#include "msse/problem_io.hpp"
#include "msse/simulate.hpp"
#include "msse/sweep.hpp"
#include "support.hpp"

using namespace msse;
using doctest::Approx;
using fx::bin;

namespace fs = std::filesystem;

namespace {

const std::string kExample1 = MSSE_DATA_DIR "/example1.json";
const std::string kExample2 = MSSE_DATA_DIR "/example2.json";

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("msse_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = scratch() / name;
  std::ofstream(path, std::ios::binary) << text;
  return path.string();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& cmd, CommandArgs args) {
  std::ostringstream out, err;
  const int code = run_command(cmd, args, out, err);
  return {code, out.str(), err.str()};
}

CommandArgs with_problem(const std::string& path) {
  CommandArgs a;
  a.problem_path = path;
  return a;
}

std::vector<std::vector<std::string>> csv_section(const std::string& text, std::size_t section = 0) {
  std::istringstream in(text);
  std::string line;
  std::size_t current = 0;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      ++current;
      continue;
    }
    if (current != section) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kValid = R"({
  "states": ["a", "b"],
  "prior": [0.5, 0.5],
  "options": [{"name": "x", "payoffs": [1, 0]}, {"name": "y", "payoffs": [0, 1]}],
  "sources": [{"blocks": [["a"], ["b"]], "multiplier": 1}]
})";

}  // namespace

TEST_CASE("bundled problem files") {
  const auto two = parse_problem(kExample2);
  CHECK(two.problem.num_states() == 4);
  CHECK(two.problem.num_options() == 2);
  CHECK(two.problem.layers().depth() == 2);
  CHECK(two.problem.layers().layer(0).multiplier == 0.25);
  CHECK(two.warnings.empty());

  const auto one = parse_problem(kExample1);
  REQUIRE(one.problem.layers().depth() == 2);
  CHECK(one.problem.layers().layer(0).partition ==
        Partition(4, {event_of({0}), event_of({1, 2}), event_of({3})}));
  CHECK(one.problem.layers().layer(1).partition == bin(4, {0, 1}));
}

TEST_CASE("problem file diagnostics") {
  auto error_of = [](const std::string& text) {
    try {
      parse_problem_text(text, "t.json");
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_of(kValid) == "no error");

  std::string bad = kValid;
  bad.replace(bad.find("[0.5, 0.5]"), 10, "[0.5, 0.4]");
  CHECK(error_of(bad).find("/prior") != std::string::npos);

  bad = kValid;
  bad.replace(bad.find("[[\"a\"], [\"b\"]]"), 14, "[[\"a\"], [\"q\"]]");
  CHECK(error_of(bad).find("/sources/0/blocks/1/0") != std::string::npos);

  bad = kValid;
  bad.replace(bad.find("\"multiplier\": 1"), 15, "\"multiplier\": -1");
  CHECK(error_of(bad).find("/sources/0") != std::string::npos);

  bad = kValid;
  bad.replace(bad.find("[1, 0]"), 6, "[1]");
  CHECK(error_of(bad).find("/options/0/payoffs") != std::string::npos);

  CHECK(error_of("{\"states\": [\"a\",\n \"b\"\n,]}").find("line 3") != std::string::npos);
  CHECK(error_of(R"({"states": ["a"], "colour": 1})").find("/colour") != std::string::npos);

  const std::string weak = R"({
    "states": ["a", "b", "c"], "prior": [0.2, 0.3, 0.5],
    "options": [{"name": "x", "payoffs": [1, 0, 0]}, {"name": "y", "payoffs": [0, 1, 0]}],
    "sources": [{"blocks": [["a"], ["b", "c"]], "multiplier": 1}]})";
  CHECK(error_of(weak).find("reveal") != std::string::npos);

  // Priors off by less than the tolerance are renormalized.
  std::string close = kValid;
  close.replace(close.find("[0.5, 0.5]"), 10, "[0.5, 0.5000000001]");
  const auto parsed = parse_problem_text(close);
  CHECK(parsed.problem.prior()[0] + parsed.problem.prior()[1] == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("discarded sources are reported as warnings") {
  std::string text = kValid;
  text.replace(text.find("\"multiplier\": 1}"), 16,
               "\"multiplier\": 1}, {\"blocks\": [[\"b\"], [\"a\"]], \"multiplier\": 3}");
  const auto parsed = parse_problem_text(text);
  REQUIRE(parsed.warnings.size() == 1);
  CHECK(parsed.warnings[0].find("dropped") != std::string::npos);
}

TEST_CASE("problem files round trip") {
  for (const auto& path : {kExample1, kExample2}) {
    const auto first = parse_problem(path).problem;
    std::ostringstream out;
    write_problem(first, out);
    const auto second = parse_problem_text(out.str()).problem;
    CHECK(first == second);
    std::ostringstream again;
    write_problem(second, again);
    CHECK(out.str() == again.str());
  }
  // An awkward prior that needs renormalizing still comes back identical.
  std::string text = kValid;
  text.replace(text.find("[0.5, 0.5]"), 10, "[0.1, 0.9000000000001]");
  const auto first = parse_problem_text(text).problem;
  std::ostringstream out;
  write_problem(first, out);
  CHECK(parse_problem_text(out.str()).problem == first);
}

TEST_CASE("solve command") {
  auto args = with_problem(kExample2);
  const auto r = run("solve", args);
  REQUIRE(r.code == kExitOk);
  const auto rows = csv_section(r.out, 0);
  REQUIRE(rows.size() == 1 + 8);
  CHECK(rows[0] == std::vector<std::string>{"state", "option", "prob", "value"});
  const auto uncond = csv_section(r.out, 1);
  REQUIRE(uncond.size() == 3);
  CHECK(std::stod(uncond[1][1]) == Approx(0.5).epsilon(1e-10));
  CHECK(std::stod(uncond[2][1]) == Approx(0.5).epsilon(1e-10));
  const auto summary = csv_section(r.out, 2);
  CHECK(summary[0] == std::vector<std::string>{"objective", "residual", "iterations"});
  CHECK(std::stod(summary[1][1]) < 1e-8);

  // Equal multipliers: the state with only option 1 worth H.
  const std::string flat = write_file("flat.json", [] {
    std::ostringstream o;
    write_problem(fx::example2(1.0, 1.0), o);
    return o.str();
  }());
  const auto rf = run("solve", with_problem(flat));
  const auto frows = csv_section(rf.out, 0);
  CHECK(frows[3][0] == "HL");
  CHECK(frows[3][1] == "1");
  CHECK(std::stod(frows[3][2]) == Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-9));

  // Identical bytes on a second run.
  CHECK(run("solve", args).out == r.out);

  auto capped = args;
  capped.solver.max_iter = 2;
  CHECK(run("solve", capped).code == kExitNoConvergence);

  const auto missing = run("solve", with_problem(write_file("broken.json", "{\"states\": [")));
  CHECK(missing.code == kExitInput);
  CHECK(missing.err.find("error") != std::string::npos);
  CHECK(run("solve", with_problem((scratch() / "absent.json").string())).code == kExitInput);
}

TEST_CASE("sweep command") {
  auto args = with_problem(kExample1);
  args.param = "lambda1";
  args.from = 0.05;
  args.to = 1.0;
  args.steps = 7;
  args.scale = "log";
  const auto r = run("sweep", args);
  REQUIRE(r.code == kExitOk);
  const auto rows = csv_section(r.out);
  CHECK(rows.size() == 1 + 7 * 4 * 2);
  CHECK(rows[0] == std::vector<std::string>{"lambda_value", "state", "option", "prob"});
  CHECK(std::stod(rows[1][0]) == 0.05);
  CHECK(std::stod(rows.back()[0]) == 1.0);

  auto single = with_problem(kExample2);
  single.from = single.to = 0.25;
  single.steps = 1;
  const auto one = csv_section(run("sweep", single).out);
  const auto solved = csv_section(run("solve", with_problem(kExample2)).out);
  REQUIRE(one.size() == solved.size());
  for (std::size_t i = 1; i < one.size(); ++i) CHECK(one[i][3] == solved[i][2]);

  auto bad = args;
  bad.from = 2.0;
  CHECK(run("sweep", bad).code == kExitInput);
  bad = args;
  bad.param = "lambda9";
  CHECK(run("sweep", bad).code == kExitInput);
  bad = args;
  bad.steps = 1;
  CHECK(run("sweep", bad).code == kExitInput);
  bad = args;
  bad.scale = "cubic";
  CHECK(run("sweep", bad).code == kExitInput);
}

TEST_CASE("sweep grid values") {
  SweepSpec spec{0, 0.1, 10.0, 3, SweepScale::Log};
  const auto v = sweep_values(spec);
  CHECK(v[0] == 0.1);
  CHECK(v[1] == Approx(1.0).epsilon(1e-15));
  CHECK(v[2] == 10.0);
  spec.scale = SweepScale::Linear;
  CHECK(sweep_values(spec)[1] == Approx(5.05));
  CHECK(parse_group("lambda2") == 1);
  CHECK(parse_group("0") == 0);
  CHECK_THROWS_AS(parse_group("lambda0"), InputError);
  CHECK_THROWS_AS(parse_group("mu"), InputError);
}

TEST_CASE("bias command") {
  const auto r = run("bias", with_problem(kExample2));
  REQUIRE(r.code == kExitOk);
  const auto rows = csv_section(r.out);
  REQUIRE(rows.size() == 1 + 8);
  CHECK(rows[0] == std::vector<std::string>{"option", "state", "v_true", "alpha", "bias_payoff_units"});
  // Option 1: up where it is worth H, down where it is worth L.
  for (std::size_t i = 1; i <= 4; ++i) {
    CHECK(rows[i][0] == "1");
    const double bias = std::stod(rows[i][4]);
    if (rows[i][2] == "1") CHECK(bias > 0.0);
    if (rows[i][2] == "0") CHECK(bias < 0.0);
  }
}

TEST_CASE("simulate command") {
  auto args = with_problem(kExample2);
  args.draws = 1;
  auto r = run("simulate", args);
  REQUIRE(r.code == kExitOk);
  CHECK(csv_section(r.out).size() == 2);

  args.draws = 100000;
  args.seed = 99;
  r = run("simulate", args);
  CHECK(run("simulate", args).out == r.out);
  const auto rows = csv_section(r.out);
  double ones = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) ones += rows[i][1] == "1" ? 1.0 : 0.0;
  const double n = static_cast<double>(args.draws);
  CHECK(std::abs(ones / n - 0.5) < 3.0 * std::sqrt(0.25 / n));

  args.seed = 100;
  CHECK(run("simulate", args).out != r.out);
  args.draws = 0;
  CHECK(run("simulate", args).code == kExitInput);
}

TEST_CASE("sampling helpers") {
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const double u = unit_uniform(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == unit_uniform(b));
  }
  CHECK(sample_index({0.2, 0.0, 0.8}, 0.0) == 0);
  CHECK(sample_index({0.2, 0.0, 0.8}, 0.2) == 2);
  CHECK(sample_index({0.2, 0.0, 0.8}, 0.9999999999999999) == 2);
}

TEST_CASE("fit command") {
  auto args = with_problem(kExample2);
  args.draws = 20000;
  args.seed = 3;
  const auto sim = run("simulate", args);
  args.choices_path = write_file("choices.csv", sim.out);
  const auto r = run("fit", args);
  REQUIRE(r.code == kExitOk);
  const auto rows = csv_section(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"parameter", "estimate", "std_error"});
  CHECK(rows[1][0] == "1@0");
  CHECK(rows[2][0] == "1@1");
  CHECK(rows[3][0] == "2@1");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][2]) > 0.0);

  args.choices_path = write_file("empty.csv", "state,option\n");
  CHECK(run("fit", args).code == kExitInput);
  args.choices_path = write_file("nohdr.csv", "HH,1\n");
  CHECK(run("fit", args).code == kExitInput);
  args.choices_path = write_file("stray.csv", "state,option\nHH,3\n");
  CHECK(run("fit", args).code == kExitInput);
  // Option 2 never picked in LL.
  args.choices_path = write_file("sep.csv", "state,option\nHH,1\nHH,2\nHL,1\nHL,2\nLH,1\nLH,2\nLL,1\n");
  const auto sep = run("fit", args);
  CHECK(sep.code == kExitInput);
  CHECK(sep.err.find("separation") != std::string::npos);
}

TEST_CASE("logit fit recovers known utilities") {
  // Exact expected counts from a logit with known parameters.
  const auto problem = fx::example2(1.0, 1.0, 1.0, 0.0);
  const auto design = value_design(problem);
  const Eigen::Vector3d beta(-0.3, 0.9, 0.4);  // 1@0, 1@1, 2@1
  Eigen::MatrixXd counts(2, 4);
  for (Eigen::Index s = 0; s < 4; ++s) {
    double u[2];
    for (Eigen::Index n = 0; n < 2; ++n) {
      const int j = design.param[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)];
      u[n] = j >= 0 ? beta(j) : 0.0;
    }
    const double p = 1.0 / (1.0 + std::exp(u[1] - u[0]));
    counts(0, s) = 1e6 * p;
    counts(1, s) = 1e6 * (1 - p);
  }
  const auto fit = fit_logit(design, counts);
  CHECK(fit.converged);
  CHECK((fit.estimate - beta).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(fit.std_error.minCoeff() > 0.0);
}

TEST_CASE("verify command") {
  const auto two = run("verify", with_problem(kExample2));
  CHECK(two.code == kExitOk);
  CHECK(two.out.find(",fail,") == std::string::npos);
  CHECK(two.out.find("grid_oracle,pass") != std::string::npos);

  const auto one = run("verify", with_problem(kExample1));
  CHECK(one.code == kExitOk);
  CHECK(one.out.find("strategy_enumeration,skip") != std::string::npos);

  // Six states: brute-force checks are skipped with a notice, not failed.
  std::ostringstream text;
  text << R"({"states": ["a","b","c","d","e","f"], "prior": [0.1,0.2,0.1,0.2,0.2,0.2],
    "options": [{"name": "x", "payoffs": [1,0,1,0,1,0]}, {"name": "y", "payoffs": [0,1,0,1,0,1]}],
    "sources": [{"blocks": [["a","b","c"],["d","e","f"]], "multiplier": 0.5},
                {"blocks": [["a","d"],["b","c","e","f"]], "multiplier": 0.5},
                {"blocks": [["b","e"],["a","c","d","f"]], "multiplier": 1}]})";
  const auto six = run("verify", with_problem(write_file("six.json", text.str())));
  CHECK(six.code == kExitOk);
  CHECK(six.out.find("strategy_enumeration,skip") != std::string::npos);
  CHECK(six.err.find("notice") != std::string::npos);
}

TEST_CASE("command-line binary") {
  const std::string exe = MSSE_CLI;
  const auto out = (scratch() / "solve.csv").string();
  CHECK(std::system((exe + " solve --problem " + kExample2 + " --out " + out).c_str()) == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "state,option,prob,value");
  const int bad = std::system((exe + " solve --problem /nonexistent.json 2>/dev/null").c_str());
  CHECK(WEXITSTATUS(bad) == 1);
  const int capped =
      std::system((exe + " solve --problem " + kExample2 + " --max-iter 2 >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(capped) == 2);
  const int unknown = std::system((exe + " frobnicate >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(unknown) == 1);
  const int fp = std::system(
      (exe + " solve --method fixed-point --problem " + kExample2 + " >/dev/null").c_str());
  CHECK(fp == 0);
}
