#include "msse/problem.hpp"

#include <cmath>

namespace msse {

ChoiceProblem::ChoiceProblem(StateSpace space, Distribution prior, std::vector<std::string> options,
                             Eigen::MatrixXd payoffs, std::vector<InfoSource> sources)
    : space_(std::move(space)),
      prior_(std::move(prior)),
      options_(std::move(options)),
      payoffs_(std::move(payoffs)),
      sources_(std::move(sources)),
      layers_(build_layers(sources_, &discarded_)) {
  validate_and_index();
}

ChoiceProblem::ChoiceProblem(StateSpace space, Distribution prior, std::vector<std::string> options,
                             Eigen::MatrixXd payoffs, LayeredStructure layers)
    : space_(std::move(space)),
      prior_(std::move(prior)),
      options_(std::move(options)),
      payoffs_(std::move(payoffs)),
      layers_(std::move(layers)) {
  validate_and_index();
}

std::size_t ChoiceProblem::option_index(const std::string& name) const {
  for (std::size_t n = 0; n < options_.size(); ++n) {
    if (options_[n] == name) return n;
  }
  throw InputError("unknown option '" + name + "'");
}

void ChoiceProblem::validate_and_index() {
  const auto S = space_.size();
  if (prior_.size() != S) throw InputError("prior length does not match the state count");
  if (options_.size() < 2) throw InputError("a choice problem needs at least two options");
  for (std::size_t i = 0; i < options_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (options_[i] == options_[j]) throw InputError("duplicate option name '" + options_[i] + "'");
    }
  }
  if (static_cast<std::size_t>(payoffs_.rows()) != options_.size() ||
      static_cast<std::size_t>(payoffs_.cols()) != S) {
    throw InputError("payoff matrix must be options x states");
  }
  if (!payoffs_.allFinite()) throw InputError("payoffs must be finite");
  if (layers_.num_states() != S) throw InputError("layers do not match the state space");

  const auto M = layers_.depth();
  const double top = layers_.top_multiplier();
  std::vector<Partition> cheaper;
  levels_.clear();
  for (std::size_t k = 0; k < M; ++k) {
    if (k > 0) cheaper.push_back(layers_.layer(k - 1).partition);
    CellLevel level;
    level.cells = refine_cells(S, cheaper);
    level.weight = k == 0 ? layers_.layer(0).multiplier / top
                          : (layers_.layer(k).multiplier - layers_.layer(k - 1).multiplier) / top;
    level.of_state.assign(S, 0);
    for (std::size_t c = 0; c < level.cells.size(); ++c) {
      level.mass.push_back(prior_.mass(level.cells[c]));
      for (std::size_t s = 0; s < S; ++s) {
        if (level.cells[c].contains(s)) level.of_state[s] = c;
      }
    }
    levels_.push_back(std::move(level));
  }
  const auto& deep_cells = levels_.back().cells;
  for (auto& level : levels_) {
    level.of_deep.resize(deep_cells.size());
    for (std::size_t b = 0; b < deep_cells.size(); ++b) {
      level.of_deep[b] = level.of_state[static_cast<std::size_t>(deep_cells[b].lowest())];
    }
  }
}

bool ChoiceProblem::operator==(const ChoiceProblem& other) const {
  if (!(space_ == other.space_) || !(prior_ == other.prior_) || options_ != other.options_) {
    return false;
  }
  if (payoffs_.rows() != other.payoffs_.rows() || payoffs_.cols() != other.payoffs_.cols() ||
      payoffs_ != other.payoffs_) {
    return false;
  }
  if (sources_.size() != other.sources_.size()) return false;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (!(sources_[i].partition == other.sources_[i].partition) ||
        sources_[i].multiplier != other.sources_[i].multiplier) {
      return false;
    }
  }
  return layers_ == other.layers_;
}

}  // namespace msse
