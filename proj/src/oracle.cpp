#include "msse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include <omp.h>

namespace msse {

void OracleConfig::validate() const {
  if (!(grid_step > 0.0 && grid_step <= 0.1)) throw InputError("grid_step must be in (0, 0.1]");
  if (max_states == 0 || max_states > 16) throw InputError("max_states must be in [1, 16]");
  if (max_options < 2) throw InputError("max_options must be at least 2");
  if (max_grid_points < 2) throw InputError("max_grid_points too small");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_problem_caps(const ChoiceProblem& problem, const OracleConfig& config) {
  config.validate();
  if (problem.num_states() > config.max_states) {
    throw OracleCapExceeded(std::to_string(problem.num_states()) + " states exceeds the oracle cap of " +
                            std::to_string(config.max_states));
  }
  if (problem.num_options() > config.max_options) {
    throw OracleCapExceeded(std::to_string(problem.num_options()) +
                            " options exceeds the oracle cap of " +
                            std::to_string(config.max_options));
  }
}

// ---------------------------------------------------------------------------
// Strategy enumeration

// Expected cost of asking `order` in sequence, computed by grouping states on
// their answers so far.
double brute_strategy_cost(const std::vector<const InfoSource*>& order, const Distribution& mu) {
  const std::size_t S = mu.size();
  std::vector<std::vector<std::size_t>> answers(S);
  double cost = 0.0;
  for (const InfoSource* src : order) {
    std::map<std::vector<std::size_t>, std::map<std::size_t, double>> groups;
    for (std::size_t s = 0; s < S; ++s) {
      groups[answers[s]][src->partition.block_index(s)] += mu[s];
    }
    double h = 0.0;
    for (const auto& [key, blocks] : groups) {
      double total = 0.0;
      for (const auto& [b, m] : blocks) total += m;
      for (const auto& [b, m] : blocks) {
        if (m > 0.0) h -= m * std::log(m / total);
      }
    }
    cost += src->multiplier * h;
    for (std::size_t s = 0; s < S; ++s) answers[s].push_back(src->partition.block_index(s));
  }
  return cost;
}

bool pins_down_state(const std::vector<const InfoSource*>& subset, std::size_t S) {
  std::vector<std::vector<std::size_t>> sig(S);
  for (const InfoSource* src : subset) {
    for (std::size_t s = 0; s < S; ++s) sig[s].push_back(src->partition.block_index(s));
  }
  std::sort(sig.begin(), sig.end());
  return std::adjacent_find(sig.begin(), sig.end()) == sig.end();
}

// ---------------------------------------------------------------------------
// Objective model shared by grid_solve and direct_policy_solve. Built from the
// layer partitions directly rather than from the problem's cell index.

struct Model {
  std::size_t N = 0, S = 0, M = 0, D = 0;
  double top = 1.0;
  std::vector<double> weight;                      // per level
  std::vector<double> mu;                          // per state
  Eigen::MatrixXd v;                               // N x S
  std::vector<std::vector<std::size_t>> cell;      // [level][state]
  std::vector<std::vector<double>> cell_mass;      // [level][cell]
  std::vector<std::vector<std::size_t>> deep_to;   // [level][deep cell] -> cell
  std::vector<double> deep_mass;
  std::vector<Event> deep_cells;
};

Model build_model(const ChoiceProblem& problem) {
  Model m;
  m.N = problem.num_options();
  m.S = problem.num_states();
  const auto& layers = problem.layers().layers();
  m.M = layers.size();
  m.top = layers.back().multiplier;
  m.mu = problem.prior().probs();
  m.v = problem.payoffs();
  for (std::size_t k = 0; k < m.M; ++k) {
    const double lo = k == 0 ? 0.0 : layers[k - 1].multiplier;
    m.weight.push_back((layers[k].multiplier - lo) / m.top);
  }
  m.cell.assign(m.M, std::vector<std::size_t>(m.S, 0));
  m.cell_mass.resize(m.M);
  for (std::size_t k = 0; k < m.M; ++k) {
    std::map<std::vector<std::size_t>, std::size_t> ids;
    for (std::size_t s = 0; s < m.S; ++s) {
      std::vector<std::size_t> key;
      for (std::size_t i = 0; i < k; ++i) key.push_back(layers[i].partition.block_index(s));
      auto it = ids.find(key);
      if (it == ids.end()) it = ids.emplace(key, ids.size()).first;
      m.cell[k][s] = it->second;
    }
    m.cell_mass[k].assign(ids.size(), 0.0);
    for (std::size_t s = 0; s < m.S; ++s) m.cell_mass[k][m.cell[k][s]] += m.mu[s];
  }
  const auto& deepest = m.cell.back();
  m.D = m.cell_mass.back().size();
  m.deep_mass = m.cell_mass.back();
  m.deep_cells.assign(m.D, Event{0});
  for (std::size_t s = 0; s < m.S; ++s) m.deep_cells[deepest[s]].mask |= Mask{1} << s;
  m.deep_to.assign(m.M, std::vector<std::size_t>(m.D, 0));
  for (std::size_t k = 0; k < m.M; ++k) {
    for (std::size_t s = 0; s < m.S; ++s) m.deep_to[k][deepest[s]] = m.cell[k][s];
  }
  return m;
}

// Column j of the model's deep cells sits at column perm[j] of the problem's.
std::vector<std::size_t> deep_permutation(const Model& m, const ChoiceProblem& problem) {
  std::vector<std::size_t> perm(m.D);
  const auto& cells = problem.deep().cells;
  for (std::size_t j = 0; j < m.D; ++j) {
    const auto it = std::find(cells.begin(), cells.end(), m.deep_cells[j]);
    perm[j] = static_cast<std::size_t>(it - cells.begin());
  }
  return perm;
}

// lambda_M * sum_w mu(w) ln sum_n prod_k a_k^w_k e^{v/lambda_M}. `x` is N x D
// in the model's deep order; `buf` holds the per-level aggregates.
double model_objective(const Model& m, const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& buf) {
  buf.resize(m.M);
  for (std::size_t k = 0; k < m.M; ++k) {
    const std::size_t C = m.cell_mass[k].size();
    buf[k].setZero(static_cast<Eigen::Index>(m.N), static_cast<Eigen::Index>(C));
    std::vector<double> members(C, 0.0);
    Eigen::MatrixXd plain = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.N),
                                                  static_cast<Eigen::Index>(C));
    for (std::size_t b = 0; b < m.D; ++b) {
      const auto c = static_cast<Eigen::Index>(m.deep_to[k][b]);
      buf[k].col(c) += m.deep_mass[b] * x.col(static_cast<Eigen::Index>(b));
      plain.col(c) += x.col(static_cast<Eigen::Index>(b));
      members[static_cast<std::size_t>(c)] += 1.0;
    }
    for (std::size_t c = 0; c < C; ++c) {
      const auto cc = static_cast<Eigen::Index>(c);
      if (m.cell_mass[k][c] > 0.0) {
        buf[k].col(cc) /= m.cell_mass[k][c];
      } else {
        buf[k].col(cc) = plain.col(cc) / members[c];
      }
    }
  }
  double total = 0.0;
  for (std::size_t s = 0; s < m.S; ++s) {
    if (!(m.mu[s] > 0.0)) continue;
    double vmax = kNegInf;
    for (std::size_t n = 0; n < m.N; ++n) {
      vmax = std::max(vmax, m.v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s)));
    }
    double z = 0.0;
    for (std::size_t n = 0; n < m.N; ++n) {
      double term = std::exp((m.v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s)) - vmax) / m.top);
      for (std::size_t k = 0; k < m.M; ++k) {
        term *= std::pow(buf[k](static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m.cell[k][s])),
                         m.weight[k]);
      }
      z += term;
    }
    if (!(z > 0.0)) return kNegInf;
    total += m.mu[s] * (m.top * std::log(z) + vmax);
  }
  return total;
}

std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(parts, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == parts) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int a = left; a >= 0; --a) {
      cur[i] = a;
      rec(i + 1, left - a);
    }
  };
  rec(0, total);
  return out;
}

double count_compositions(int total, std::size_t parts) {
  double c = 1.0;
  for (std::size_t i = 1; i < parts; ++i) {
    c = c * static_cast<double>(total + static_cast<int>(i)) / static_cast<double>(i);
  }
  return c;
}

struct Best {
  double value = kNegInf;
  std::size_t index = std::numeric_limits<std::size_t>::max();

  void offer(double v, std::size_t i) {
    if (v > value || (v == value && i < index)) {
      value = v;
      index = i;
    }
  }
};

void decode(std::size_t index, const std::vector<std::size_t>& active,
            const std::vector<std::vector<int>>& comps, int K, Eigen::MatrixXd& x) {
  const std::size_t C = comps.size();
  for (std::size_t b : active) {
    const auto& c = comps[index % C];
    index /= C;
    for (std::size_t n = 0; n < c.size(); ++n) {
      x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b)) =
          static_cast<double>(c[n]) / static_cast<double>(K);
    }
  }
}

// Local search moving mass between pairs of options inside one deep cell,
// with a shrinking transfer size.
double compass_refine(const Model& m, const std::vector<std::size_t>& active, double start,
                      double finest, Eigen::MatrixXd& x, std::size_t& evals) {
  std::vector<Eigen::MatrixXd> buf;
  double best = model_objective(m, x, buf);
  ++evals;
  constexpr int kMaxSweeps = 20000;
  for (double s = start; s >= finest; s /= 4.0) {
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      bool improved = false;
      for (std::size_t b : active) {
        const auto bc = static_cast<Eigen::Index>(b);
        for (std::size_t i = 0; i < m.N; ++i) {
          for (std::size_t j = 0; j < m.N; ++j) {
            if (i == j) continue;
            const auto ic = static_cast<Eigen::Index>(i);
            const auto jc = static_cast<Eigen::Index>(j);
            const double amount = std::min(s, x(ic, bc));
            if (!(amount > 0.0)) continue;
            const double xi = x(ic, bc), xj = x(jc, bc);
            x(ic, bc) = amount == xi ? 0.0 : xi - amount;
            x(jc, bc) = xj + amount;
            const double val = model_objective(m, x, buf);
            ++evals;
            if (val > best) {
              best = val;
              improved = true;
            } else {
              x(ic, bc) = xi;
              x(jc, bc) = xj;
            }
          }
        }
      }
      if (!improved) break;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Full-policy objective: expected payoff minus layered cost.

struct Direct {
  const Model& m;

  void aggregate(const Eigen::MatrixXd& P, std::vector<Eigen::MatrixXd>& a) const {
    a.resize(m.M);
    for (std::size_t k = 0; k < m.M; ++k) {
      const std::size_t C = m.cell_mass[k].size();
      a[k].setZero(static_cast<Eigen::Index>(m.N), static_cast<Eigen::Index>(C));
      for (std::size_t s = 0; s < m.S; ++s) {
        a[k].col(static_cast<Eigen::Index>(m.cell[k][s])) += m.mu[s] * P.col(static_cast<Eigen::Index>(s));
      }
      for (std::size_t c = 0; c < C; ++c) {
        if (m.cell_mass[k][c] > 0.0) a[k].col(static_cast<Eigen::Index>(c)) /= m.cell_mass[k][c];
      }
    }
  }

  static double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

  double value(const Eigen::MatrixXd& P, std::vector<Eigen::MatrixXd>& a) const {
    aggregate(P, a);
    double payoff = 0.0, own = 0.0;
    for (std::size_t s = 0; s < m.S; ++s) {
      for (std::size_t n = 0; n < m.N; ++n) {
        const double p = P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s));
        payoff += m.mu[s] * p * m.v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s));
        own += m.mu[s] * plogp(p);
      }
    }
    double layered = 0.0;
    for (std::size_t k = 0; k < m.M; ++k) {
      double lk = 0.0;
      for (std::size_t c = 0; c < m.cell_mass[k].size(); ++c) {
        for (std::size_t n = 0; n < m.N; ++n) {
          lk += m.cell_mass[k][c] * plogp(a[k](static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)));
        }
      }
      layered += m.weight[k] * lk;
    }
    return payoff - m.top * (own - layered);
  }

  // Gradient divided by mu(w); zero-mass states get zero.
  Eigen::MatrixXd scaled_grad(const Eigen::MatrixXd& P, const std::vector<Eigen::MatrixXd>& a) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.N), static_cast<Eigen::Index>(m.S));
    for (std::size_t s = 0; s < m.S; ++s) {
      if (!(m.mu[s] > 0.0)) continue;
      for (std::size_t n = 0; n < m.N; ++n) {
        const auto nc = static_cast<Eigen::Index>(n);
        double val = m.v(nc, static_cast<Eigen::Index>(s));
        for (std::size_t k = 0; k < m.M; ++k) {
          val += m.top * m.weight[k] *
                 (1.0 + std::log(a[k](nc, static_cast<Eigen::Index>(m.cell[k][s]))));
        }
        val -= m.top * (1.0 + std::log(P(nc, static_cast<Eigen::Index>(s))));
        g(nc, static_cast<Eigen::Index>(s)) = val;
      }
    }
    return g;
  }

  double directional(const Eigen::MatrixXd& scaled, const Eigen::MatrixXd& d) const {
    double out = 0.0;
    for (std::size_t s = 0; s < m.S; ++s) {
      out += m.mu[s] * scaled.col(static_cast<Eigen::Index>(s)).dot(d.col(static_cast<Eigen::Index>(s)));
    }
    return out;
  }

  Eigen::MatrixXd step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& scaled, double rate) const {
    constexpr double kFloor = 1e-300;
    Eigen::MatrixXd out = P;
    for (std::size_t s = 0; s < m.S; ++s) {
      if (!(m.mu[s] > 0.0)) continue;
      const auto sc = static_cast<Eigen::Index>(s);
      const double top = scaled.col(sc).maxCoeff();
      for (Eigen::Index n = 0; n < out.rows(); ++n) {
        out(n, sc) = std::max(kFloor, P(n, sc) * std::exp(rate * (scaled(n, sc) - top)));
      }
      out.col(sc) /= out.col(sc).sum();
    }
    return out;
  }

  double ascend(Eigen::MatrixXd& P) const {
    std::vector<Eigen::MatrixXd> a, a_new;
    double f = value(P, a);
    Eigen::MatrixXd g = scaled_grad(P, a);
    double rate = 1.0;
    for (int it = 0; it < 200000; ++it) {
      bool accepted = false;
      Eigen::MatrixXd cand, g_new;
      double f_new = 0.0, moved = 0.0;
      while (rate > 1e-30) {
        cand = step(P, g, rate);
        const Eigen::MatrixXd d = cand - P;
        moved = d.cwiseAbs().maxCoeff();
        if (moved == 0.0) break;
        f_new = value(cand, a_new);
        g_new = scaled_grad(cand, a_new);
        if (f_new >= f + 1e-4 * directional(g, d) || directional(g_new, d) >= 0.0) {
          accepted = true;
          break;
        }
        rate *= 0.5;
      }
      if (!accepted) break;
      P = std::move(cand);
      f = f_new;
      g = std::move(g_new);
      std::swap(a, a_new);
      rate = std::min(rate * 2.0, 1e12);
      if (moved < 1e-13) break;
    }
    return f;
  }
};

}  // namespace

StrategyOptimum min_strategy_cost(const std::vector<InfoSource>& sources, const Distribution& mu,
                                  const OracleConfig& config) {
  config.validate();
  if (sources.empty()) throw InputError("no sources given");
  if (sources.size() > config.max_sources) {
    throw OracleCapExceeded(std::to_string(sources.size()) + " sources exceeds the oracle cap of " +
                            std::to_string(config.max_sources));
  }
  const std::size_t S = mu.size();
  if (S > config.max_states) {
    throw OracleCapExceeded(std::to_string(S) + " states exceeds the oracle cap of " +
                            std::to_string(config.max_states));
  }
  for (const auto& src : sources) {
    if (src.partition.num_states() != S) throw InputError("source does not match the prior");
  }

  bool found = false;
  double best = 0.0;
  std::vector<const InfoSource*> best_order;
  const std::size_t count = sources.size();
  for (std::size_t bits = 1; bits < (std::size_t{1} << count); ++bits) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < count; ++i) {
      if ((bits >> i) & 1U) idx.push_back(i);
    }
    bool repeated = false;
    for (std::size_t i = 0; i < idx.size() && !repeated; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (sources[idx[i]].partition == sources[idx[j]].partition) repeated = true;
      }
    }
    if (repeated) continue;
    std::vector<const InfoSource*> subset;
    for (std::size_t i : idx) subset.push_back(&sources[i]);
    if (!pins_down_state(subset, S)) continue;
    do {
      std::vector<const InfoSource*> order;
      for (std::size_t i : idx) order.push_back(&sources[i]);
      const double c = brute_strategy_cost(order, mu);
      if (!found || c < best) {
        found = true;
        best = c;
        best_order = order;
      }
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  if (!found) throw NotGenerating("sources do not pin down the state");

  std::vector<LearningStrategy::Step> steps;
  for (const InfoSource* src : best_order) steps.push_back({src->partition, src->multiplier});
  return {best, LearningStrategy(std::move(steps))};
}

double grid_objective(const ChoiceProblem& problem, const Eigen::MatrixXd& x) {
  const Model m = build_model(problem);
  const auto perm = deep_permutation(m, problem);
  Eigen::MatrixXd local(x.rows(), x.cols());
  for (std::size_t j = 0; j < m.D; ++j) {
    local.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(perm[j]));
  }
  std::vector<Eigen::MatrixXd> buf;
  return model_objective(m, local, buf);
}

GridOptimum grid_solve(const ChoiceProblem& problem, const OracleConfig& config, Execution exec) {
  check_problem_caps(problem, config);
  const Model m = build_model(problem);
  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < m.D; ++b) {
    if (m.deep_mass[b] > 0.0) active.push_back(b);
  }
  const std::size_t dims = active.size() * (m.N - 1);
  if (dims > config.max_free_dims) {
    throw OracleCapExceeded(std::to_string(dims) + " free dimensions exceeds the grid cap of " +
                            std::to_string(config.max_free_dims));
  }

  // Coarsest resolution first, refined until the point budget is spent.
  const int finest = static_cast<int>(std::lround(1.0 / config.grid_step));
  int K = 1;
  while (K < finest &&
         std::pow(count_compositions(K + 1, m.N), static_cast<double>(active.size())) <=
             static_cast<double>(config.max_grid_points)) {
    ++K;
  }
  const auto comps = compositions(K, m.N);
  std::size_t total = 1;
  for (std::size_t i = 0; i < active.size(); ++i) total *= comps.size();

  const Eigen::MatrixXd base = Eigen::MatrixXd::Constant(
      static_cast<Eigen::Index>(m.N), static_cast<Eigen::Index>(m.D), 1.0 / static_cast<double>(m.N));

  Best best;
  if (exec == Execution::Parallel) {
#pragma omp parallel num_threads(worker_threads())
    {
      Best local;
      Eigen::MatrixXd x = base;
      std::vector<Eigen::MatrixXd> buf;
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < total; ++i) {
        decode(i, active, comps, K, x);
        local.offer(model_objective(m, x, buf), i);
      }
#pragma omp critical
      best.offer(local.value, local.index);
    }
  } else {
    Eigen::MatrixXd x = base;
    std::vector<Eigen::MatrixXd> buf;
    for (std::size_t i = 0; i < total; ++i) {
      decode(i, active, comps, K, x);
      best.offer(model_objective(m, x, buf), i);
    }
  }
  if (best.value == kNegInf) throw InadmissibleAggregates("no admissible grid point");

  Eigen::MatrixXd x = base;
  decode(best.index, active, comps, K, x);
  std::size_t evals = total;
  const double value =
      compass_refine(m, active, 1.0 / static_cast<double>(K), config.grid_step * 1e-3, x, evals);

  GridOptimum out;
  out.objective = value;
  out.evaluations = evals;
  out.x.resize(x.rows(), x.cols());
  const auto perm = deep_permutation(m, problem);
  for (std::size_t j = 0; j < m.D; ++j) {
    out.x.col(static_cast<Eigen::Index>(perm[j])) = x.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

DirectOptimum direct_policy_solve(const ChoiceProblem& problem, const OracleConfig& config) {
  check_problem_caps(problem, config);
  const Model m = build_model(problem);
  const Direct direct{m};
  std::mt19937_64 gen(config.seed);
  auto uniform01 = [&gen] { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; };

  DirectOptimum out;
  out.objective = kNegInf;
  const auto N = static_cast<Eigen::Index>(m.N);
  const auto S = static_cast<Eigen::Index>(m.S);
  for (unsigned r = 0; r < std::max(1U, config.restarts); ++r) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Constant(N, S, 1.0 / static_cast<double>(m.N));
    if (r > 0) {
      for (Eigen::Index s = 0; s < S; ++s) {
        for (Eigen::Index n = 0; n < N; ++n) P(n, s) = -std::log(uniform01());
        P.col(s) /= P.col(s).sum();
      }
    }
    const double f = direct.ascend(P);
    if (f > out.objective) {
      out.objective = f;
      out.state_probs = P;
    }
  }
  return out;
}

Eigen::MatrixXd finite_diff_grad(const std::function<double(const Eigen::MatrixXd&)>& f,
                                 const Eigen::MatrixXd& x, double step) {
  if (!(step > 0.0)) throw InputError("finite-difference step must be positive");
  if (x.size() == 0 || x.minCoeff() < 10.0 * step) {
    throw InputError("point too close to the simplex boundary for finite differences");
  }
  Eigen::MatrixXd g(x.rows(), x.cols());
  Eigen::MatrixXd probe = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      probe(i, j) = x(i, j) + step;
      const double up = f(probe);
      probe(i, j) = x(i, j) - step;
      const double down = f(probe);
      probe(i, j) = x(i, j);
      g(i, j) = (up - down) / (2.0 * step);
    }
    g.col(j).array() -= g.col(j).mean();
  }
  return g;
}

}  // namespace msse
