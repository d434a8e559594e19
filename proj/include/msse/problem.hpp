#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msse/distribution.hpp"
#include "msse/partition.hpp"

namespace msse {

/// One depth of the layer refinement: the cells of the join of the cheapest k
/// layers (depth 0 is the whole space).
struct CellLevel {
  std::vector<Event> cells;
  std::vector<double> mass;             // mu(cell)
  std::vector<std::size_t> of_state;    // cell holding each state
  std::vector<std::size_t> of_deep;     // cell holding each deepest cell
  double weight = 0.0;                  // exponent on Pr(n | cell) in the choice rule
};

/// Prior, options with state-dependent payoffs, and the priced layer
/// structure. Immutable after construction.
class ChoiceProblem {
public:
  /// Builds the layers from binary sources; sources priced above the last
  /// needed layer are kept aside in discarded_sources().
  ChoiceProblem(StateSpace space, Distribution prior, std::vector<std::string> options,
                Eigen::MatrixXd payoffs, std::vector<InfoSource> sources);

  ChoiceProblem(StateSpace space, Distribution prior, std::vector<std::string> options,
                Eigen::MatrixXd payoffs, LayeredStructure layers);

  const StateSpace& space() const { return space_; }
  const Distribution& prior() const { return prior_; }
  std::size_t num_states() const { return space_.size(); }
  std::size_t num_options() const { return options_.size(); }
  const std::vector<std::string>& options() const { return options_; }
  std::size_t option_index(const std::string& name) const;

  /// N x |states|.
  const Eigen::MatrixXd& payoffs() const { return payoffs_; }
  double payoff(std::size_t option, std::size_t state) const { return payoffs_(option, state); }

  const LayeredStructure& layers() const { return layers_; }
  double top_multiplier() const { return layers_.top_multiplier(); }
  const std::vector<InfoSource>& sources() const { return sources_; }
  const std::vector<InfoSource>& discarded_sources() const { return discarded_; }

  /// levels()[k] for k = 0..M-1; the last one holds the free-variable cells.
  const std::vector<CellLevel>& levels() const { return levels_; }
  const CellLevel& deep() const { return levels_.back(); }
  std::size_t num_deep_cells() const { return levels_.back().cells.size(); }

  bool operator==(const ChoiceProblem& other) const;

private:
  void validate_and_index();

  StateSpace space_;
  Distribution prior_;
  std::vector<std::string> options_;
  Eigen::MatrixXd payoffs_;
  std::vector<InfoSource> sources_;
  std::vector<InfoSource> discarded_;
  LayeredStructure layers_;
  std::vector<CellLevel> levels_;
};

}  // namespace msse
