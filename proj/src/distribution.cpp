#include "msse/distribution.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace msse {

void KahanSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

namespace {

void check_entries(const std::vector<double>& probs) {
  if (probs.empty()) throw InputError("distribution over zero states");
  if (probs.size() > StateSpace::kMaxStates) throw InputError("distribution over more than 64 states");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
      throw InputError("probability " + std::to_string(i) + " is negative or not finite");
    }
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  check_entries(probs_);
  const double total = compensated_sum(probs_);
  if (std::abs(total - 1.0) > kSumTol) {
    throw InputError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

Distribution Distribution::normalized(std::vector<double> weights) {
  check_entries(weights);
  const double total = compensated_sum(weights);
  if (!(total > 0.0)) throw InputError("cannot normalize a zero measure");
  if (std::abs(total - 1.0) > 4 * std::numeric_limits<double>::epsilon()) {
    for (auto& w : weights) w /= total;
  }
  return Distribution(std::move(weights));
}

Distribution Distribution::uniform(std::size_t n) {
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::point_mass(std::size_t n, std::size_t state) {
  std::vector<double> p(n, 0.0);
  p.at(state) = 1.0;
  return Distribution(std::move(p));
}

double Distribution::mass(Event e) const {
  KahanSum acc;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (e.contains(i)) acc.add(probs_[i]);
  }
  return acc.value();
}

Distribution Distribution::conditioned(Event e) const {
  const double m = mass(e);
  if (!(m > 0.0)) throw InputError("conditioning on a zero-probability event");
  std::vector<double> out(probs_.size(), 0.0);
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (e.contains(i)) out[i] = probs_[i] / m;
  }
  return Distribution::normalized(std::move(out));
}

}  // namespace msse
