#pragma once

#include <span>
#include <vector>

#include "msse/partition.hpp"

namespace msse {

/// Probability measure over the states of a finite space.
class Distribution {
public:
  static constexpr double kSumTol = 1e-12;

  /// Requires non-negative finite entries summing to one within kSumTol.
  explicit Distribution(std::vector<double> probs);

  /// Divides by the (compensated) total; a vector already normalized to within
  /// a few ulps is kept bit-for-bit.
  static Distribution normalized(std::vector<double> weights);
  static Distribution uniform(std::size_t n);
  static Distribution point_mass(std::size_t n, std::size_t state);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

  double mass(Event e) const;
  /// mu(. | e); throws InputError when mu(e) == 0.
  Distribution conditioned(Event e) const;

  bool operator==(const Distribution&) const = default;

private:
  std::vector<double> probs_;
};

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> xs);

/// Running Neumaier accumulator.
class KahanSum {
public:
  void add(double x);
  double value() const { return sum_ + carry_; }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace msse
