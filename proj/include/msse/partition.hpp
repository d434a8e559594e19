#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace msse {

/// Thrown for malformed model input (bad labels, mismatched spaces, ...).
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A join collapsed to the one-block cover.
class DegeneratePartition : public InputError {
public:
  using InputError::InputError;
};

/// The information sources cannot reveal every state.
class NotGenerating : public InputError {
public:
  using InputError::InputError;
};

using Mask = std::uint64_t;

/// Finite, ordered set of named states. At most 64 so events fit in a mask.
class StateSpace {
public:
  static constexpr std::size_t kMaxStates = 64;

  explicit StateSpace(std::vector<std::string> labels);
  /// Anonymous states named w1..wn.
  static StateSpace anonymous(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::size_t index_of(const std::string& label) const;
  Mask full_mask() const;

  bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }

private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Subset of states encoded as a bitmask over StateSpace positions.
struct Event {
  Mask mask = 0;

  bool contains(std::size_t state) const { return (mask >> state) & 1U; }
  bool empty() const { return mask == 0; }
  int count() const { return __builtin_popcountll(mask); }
  int lowest() const { return __builtin_ctzll(mask); }

  friend Event operator&(Event a, Event b) { return {a.mask & b.mask}; }
  friend Event operator|(Event a, Event b) { return {a.mask | b.mask}; }
  bool operator==(const Event&) const = default;
};

Event event_of(std::initializer_list<std::size_t> states);

/// Disjoint nonempty events covering the space, at least two of them.
/// Blocks are kept sorted by lowest member so equality is structural.
class Partition {
public:
  Partition(std::size_t num_states, std::vector<Event> blocks);

  static Partition discrete(std::size_t num_states);
  /// {A, A^c}.
  static Partition binary(std::size_t num_states, Event a);

  std::size_t num_states() const { return num_states_; }
  std::size_t size() const { return blocks_.size(); }
  const std::vector<Event>& blocks() const { return blocks_; }
  const Event& block(std::size_t i) const { return blocks_[i]; }

  /// Index of the block holding `state`.
  std::size_t block_index(std::size_t state) const;
  bool is_discrete() const { return blocks_.size() == num_states_; }
  std::string to_string() const;

  bool operator==(const Partition&) const = default;

private:
  std::size_t num_states_;
  std::vector<Event> blocks_;
};

/// A binary partition priced at `multiplier` nats per unit of entropy.
struct InfoSource {
  InfoSource(Partition partition, double multiplier);

  Partition partition;
  double multiplier;
};

struct Layer {
  double multiplier;
  Partition partition;
};

/// Layers ordered by strictly increasing multiplier whose joint refinement is
/// the discrete partition.
class LayeredStructure {
public:
  explicit LayeredStructure(std::vector<Layer> layers);

  std::size_t depth() const { return layers_.size(); }
  std::size_t num_states() const { return layers_.front().partition.num_states(); }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  double top_multiplier() const { return layers_.back().multiplier; }
  std::vector<double> multipliers() const;

  bool operator==(const LayeredStructure& other) const;

private:
  std::vector<Layer> layers_;
};

Event realized_event(const Partition& p, std::size_t state);
bool is_coarser(const Partition& p, const Partition& q);
Partition join(std::span<const Partition> ps);
Partition join(const Partition& p, const Partition& q);
bool sigma_equal(std::span<const Partition> s, const Partition& p);

/// Masks of the blocks of the join of `ps`; an empty list gives the single
/// full cell. Unlike join() this never rejects the one-block cover.
std::vector<Event> refine_cells(std::size_t num_states, std::span<const Partition> ps);

/// Relative tolerance under which two multipliers count as the same layer.
inline constexpr double kMultiplierMergeTol = 1e-12;
bool same_multiplier(double a, double b);

/// Groups sources by multiplier into the coarsest layer sequence. Sources
/// priced above the last needed layer are appended to `discarded` if given.
LayeredStructure build_layers(std::span<const InfoSource> sources,
                              std::vector<InfoSource>* discarded = nullptr);

/// Every two-block partition of an n-state space (n <= 16).
std::vector<Partition> enumerate_binary_partitions(std::size_t num_states);
std::vector<Partition> enumerate_binary_partitions(const StateSpace& space);

}  // namespace msse
