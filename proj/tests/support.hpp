#pragma once

#include <cmath>
#include <initializer_list>
#include <random>
#include <vector>

#include "msse/problem.hpp"
#include "msse/simulate.hpp"

namespace fx {

using namespace msse;

inline Partition bin(std::size_t n, std::initializer_list<std::size_t> side) {
  return Partition::binary(n, event_of(side));
}

inline Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()),
                    static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Two options worth H or L. States HH, HL, LH, LL. Option 1's value is
// learned at l1, option 2's at l2.
inline ChoiceProblem example2(double l1, double l2, double H = 1.0, double L = 0.0,
                              std::vector<double> prior = {0.25, 0.25, 0.25, 0.25}) {
  return ChoiceProblem(StateSpace({"HH", "HL", "LH", "LL"}), Distribution(std::move(prior)),
                       {"1", "2"}, rows({{H, H, L, L}, {H, L, H, L}}),
                       std::vector<InfoSource>{{bin(4, {0, 1}), l1}, {bin(4, {0, 2}), l2}});
}

// Accept a prize of +y (blue majority) or -y, or reject for 0. States by
// red-ball count 40, 49, 51, 60.
inline ChoiceProblem example1(double l1, double l2, double y = 1.0) {
  return ChoiceProblem(StateSpace({"red40", "red49", "red51", "red60"}), Distribution::uniform(4),
                       {"accept", "reject"}, rows({{y, y, -y, -y}, {0, 0, 0, 0}}),
                       std::vector<InfoSource>{{bin(4, {0}), l1},
                                               {bin(4, {3}), l1},
                                               {bin(4, {1, 2}), l1},
                                               {bin(4, {0, 1}), l2}});
}

inline double uniform(std::mt19937_64& gen) { return unit_uniform(gen); }

inline Distribution random_prior(std::mt19937_64& gen, std::size_t n, double floor = 0.0) {
  std::vector<double> w(n);
  for (auto& x : w) x = floor - std::log(1.0 - uniform(gen));
  return Distribution::normalized(w);
}

inline Partition random_binary(std::mt19937_64& gen, std::size_t n) {
  const auto all = enumerate_binary_partitions(n);
  return all[static_cast<std::size_t>(uniform(gen) * static_cast<double>(all.size()))];
}

inline Partition random_partition(std::mt19937_64& gen, std::size_t n) {
  for (;;) {
    std::vector<Mask> blocks(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
      blocks[static_cast<std::size_t>(uniform(gen) * static_cast<double>(n))] |= Mask{1} << s;
    }
    std::vector<Event> events;
    for (Mask b : blocks) {
      if (b) events.push_back(Event{b});
    }
    if (events.size() >= 2) return Partition(n, events);
  }
}

// Binary sources that pin down the state, at most `max_sources` of them,
// multipliers drawn from `levels` distinct values.
inline std::vector<InfoSource> random_sources(std::mt19937_64& gen, std::size_t n,
                                              std::size_t max_sources, std::size_t levels) {
  std::vector<double> mults;
  for (std::size_t i = 0; i < levels; ++i) mults.push_back(0.1 + 1.9 * uniform(gen));
  for (;;) {
    const std::size_t count = 1 + static_cast<std::size_t>(uniform(gen) * static_cast<double>(max_sources));
    std::vector<InfoSource> out;
    std::vector<Partition> parts;
    for (std::size_t i = 0; i < count; ++i) {
      Partition p = random_binary(gen, n);
      out.emplace_back(p, mults[static_cast<std::size_t>(uniform(gen) * static_cast<double>(levels))]);
      parts.push_back(p);
    }
    if (join(parts).is_discrete()) return out;
  }
}

struct InstanceShape {
  std::size_t max_states = 4;
  std::size_t max_options = 3;
  std::size_t max_depth = 2;
  std::size_t max_sources = 3;
  std::size_t max_free_dims = 4;
  double payoff_scale = 1.0;
};

// Random problem within the brute-force caps.
inline ChoiceProblem random_problem(std::mt19937_64& gen, const InstanceShape& shape = {}) {
  for (;;) {
    const std::size_t S = 2 + static_cast<std::size_t>(uniform(gen) * static_cast<double>(shape.max_states - 1));
    const std::size_t N = 2 + static_cast<std::size_t>(uniform(gen) * static_cast<double>(shape.max_options - 1));
    auto sources = random_sources(gen, S, shape.max_sources, shape.max_depth);
    Eigen::MatrixXd v(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(S));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = shape.payoff_scale * uniform(gen);
    std::vector<std::string> names;
    for (std::size_t n = 0; n < N; ++n) names.push_back("o" + std::to_string(n + 1));
    ChoiceProblem p(StateSpace::anonymous(S), random_prior(gen, S, 0.05), names, v, sources);
    if (p.layers().depth() <= shape.max_depth &&
        p.num_deep_cells() * (N - 1) <= shape.max_free_dims) {
      return p;
    }
  }
}

// Interior point: half uniform, half a random simplex point, per deep cell.
inline Eigen::MatrixXd random_interior(std::mt19937_64& gen, std::size_t N, std::size_t D) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(D));
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    for (Eigen::Index n = 0; n < x.rows(); ++n) x(n, b) = -std::log(1.0 - uniform(gen));
    x.col(b) = 0.5 * x.col(b) / x.col(b).sum() +
               Eigen::VectorXd::Constant(x.rows(), 0.5 / static_cast<double>(N));
  }
  return x;
}

}  // namespace fx
