#include "msse/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msse {

namespace {

Mask full_mask_of(std::size_t n) {
  return n == 64 ? ~Mask{0} : ((Mask{1} << n) - 1);
}

void canonicalize(std::vector<Event>& blocks) {
  std::sort(blocks.begin(), blocks.end(),
            [](Event a, Event b) { return a.lowest() < b.lowest(); });
}

void require_same_space(const Partition& p, const Partition& q) {
  if (p.num_states() != q.num_states()) {
    throw InputError("partitions live on different state spaces (" +
                     std::to_string(p.num_states()) + " vs " +
                     std::to_string(q.num_states()) + " states)");
  }
}

}  // namespace

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InputError("state space must have at least one state");
  if (labels_.size() > kMaxStates) {
    throw InputError("state space has " + std::to_string(labels_.size()) +
                     " states; at most 64 are supported");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw InputError("duplicate state label '" + labels_[i] + "'");
    }
  }
}

StateSpace StateSpace::anonymous(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i + 1));
  return StateSpace(std::move(labels));
}

std::size_t StateSpace::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw InputError("unknown state '" + label + "'");
  return it->second;
}

Mask StateSpace::full_mask() const { return full_mask_of(size()); }

Event event_of(std::initializer_list<std::size_t> states) {
  Event e;
  for (auto s : states) e.mask |= Mask{1} << s;
  return e;
}

Partition::Partition(std::size_t num_states, std::vector<Event> blocks)
    : num_states_(num_states), blocks_(std::move(blocks)) {
  if (num_states_ == 0 || num_states_ > StateSpace::kMaxStates) {
    throw InputError("partition state count out of range");
  }
  Mask seen = 0;
  for (const auto& b : blocks_) {
    if (b.empty()) throw InputError("partition has an empty block");
    if (seen & b.mask) throw InputError("partition blocks overlap");
    seen |= b.mask;
  }
  if (seen != full_mask_of(num_states_)) {
    throw InputError("partition blocks do not cover the state space");
  }
  if (blocks_.size() < 2) {
    throw DegeneratePartition("a partition needs at least two blocks");
  }
  canonicalize(blocks_);
}

Partition Partition::discrete(std::size_t num_states) {
  std::vector<Event> blocks;
  for (std::size_t i = 0; i < num_states; ++i) blocks.push_back({Mask{1} << i});
  return Partition(num_states, std::move(blocks));
}

Partition Partition::binary(std::size_t num_states, Event a) {
  return Partition(num_states, {a, Event{full_mask_of(num_states) & ~a.mask}});
}

std::size_t Partition::block_index(std::size_t state) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].contains(state)) return i;
  }
  throw InputError("state index " + std::to_string(state) + " outside partition");
}

std::string Partition::to_string() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i) out << ", ";
    out << '{';
    bool first = true;
    for (std::size_t s = 0; s < num_states_; ++s) {
      if (!blocks_[i].contains(s)) continue;
      if (!first) out << ',';
      out << 'w' << s + 1;
      first = false;
    }
    out << '}';
  }
  out << '}';
  return out.str();
}

InfoSource::InfoSource(Partition p, double lambda) : partition(std::move(p)), multiplier(lambda) {
  if (partition.size() != 2) throw InputError("an information source must be a binary partition");
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
    throw InputError("source multiplier must be positive and finite");
  }
}

LayeredStructure::LayeredStructure(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("layered structure needs at least one layer");
  const auto n = layers_.front().partition.num_states();
  std::vector<Partition> parts;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].partition.num_states() != n) throw InputError("layers on different state spaces");
    if (!(layers_[i].multiplier > 0.0) || !std::isfinite(layers_[i].multiplier)) {
      throw InputError("layer multiplier must be positive and finite");
    }
    if (i > 0 && !(layers_[i].multiplier > layers_[i - 1].multiplier)) {
      throw InputError("layer multipliers must be strictly increasing");
    }
    parts.push_back(layers_[i].partition);
  }
  if (refine_cells(n, parts).size() != n) {
    throw NotGenerating("layers do not jointly reveal every state");
  }
}

std::vector<double> LayeredStructure::multipliers() const {
  std::vector<double> out;
  for (const auto& l : layers_) out.push_back(l.multiplier);
  return out;
}

bool LayeredStructure::operator==(const LayeredStructure& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].multiplier != other.layers_[i].multiplier) return false;
    if (!(layers_[i].partition == other.layers_[i].partition)) return false;
  }
  return true;
}

Event realized_event(const Partition& p, std::size_t state) {
  return p.block(p.block_index(state));
}

bool is_coarser(const Partition& p, const Partition& q) {
  require_same_space(p, q);
  // Every block of q must sit inside a single block of p.
  for (const auto& b : q.blocks()) {
    bool inside = false;
    for (const auto& a : p.blocks()) {
      if ((a.mask & b.mask) == b.mask) {
        inside = true;
        break;
      }
    }
    if (!inside) return false;
  }
  return true;
}

std::vector<Event> refine_cells(std::size_t num_states, std::span<const Partition> ps) {
  std::vector<Event> cells{Event{full_mask_of(num_states)}};
  for (const auto& p : ps) {
    if (p.num_states() != num_states) throw InputError("partitions on different state spaces");
    std::vector<Event> next;
    for (const auto& c : cells) {
      for (const auto& b : p.blocks()) {
        Event cut = c & b;
        if (!cut.empty()) next.push_back(cut);
      }
    }
    cells = std::move(next);
  }
  canonicalize(cells);
  return cells;
}

Partition join(std::span<const Partition> ps) {
  if (ps.empty()) throw InputError("join of an empty list");
  if (ps.size() == 1) return ps.front();
  const auto n = ps.front().num_states();
  for (const auto& p : ps) require_same_space(ps.front(), p);
  auto cells = refine_cells(n, ps);
  if (cells.size() < 2) throw DegeneratePartition("join collapsed to a single block");
  return Partition(n, std::move(cells));
}

Partition join(const Partition& p, const Partition& q) {
  const Partition both[] = {p, q};
  return join(both);
}

bool sigma_equal(std::span<const Partition> s, const Partition& p) {
  for (const auto& q : s) require_same_space(q, p);
  return join(s) == p;
}

bool same_multiplier(double a, double b) {
  return std::abs(a - b) <= kMultiplierMergeTol * std::max(std::abs(a), std::abs(b));
}

LayeredStructure build_layers(std::span<const InfoSource> sources,
                              std::vector<InfoSource>* discarded) {
  if (sources.empty()) throw InputError("no information sources given");
  const auto n = sources.front().partition.num_states();
  for (const auto& s : sources) {
    if (s.partition.num_states() != n) throw InputError("sources on different state spaces");
    if (!(s.multiplier > 0.0)) throw InputError("source multiplier must be positive");
  }

  std::vector<std::size_t> order(sources.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sources[a].multiplier < sources[b].multiplier;
  });

  // Chain neighbours within the merge tolerance into groups.
  std::vector<std::vector<std::size_t>> groups;
  for (auto idx : order) {
    if (!groups.empty() &&
        same_multiplier(sources[groups.back().back()].multiplier, sources[idx].multiplier)) {
      groups.back().push_back(idx);
    } else {
      groups.push_back({idx});
    }
  }

  std::vector<Layer> layers;
  std::vector<Partition> so_far;
  std::size_t used = 0;
  for (; used < groups.size(); ++used) {
    std::vector<Partition> members;
    for (auto idx : groups[used]) members.push_back(sources[idx].partition);
    Partition layer = join(members);
    so_far.push_back(layer);
    layers.push_back({sources[groups[used].front()].multiplier, std::move(layer)});
    if (refine_cells(n, so_far).size() == n) break;
  }
  if (used == groups.size()) {
    throw NotGenerating("sources cannot reveal every state; their join is " +
                        Partition(n, refine_cells(n, so_far)).to_string());
  }
  if (discarded) {
    for (std::size_t g = used + 1; g < groups.size(); ++g) {
      for (auto idx : groups[g]) discarded->push_back(sources[idx]);
    }
  }
  return LayeredStructure(std::move(layers));
}

std::vector<Partition> enumerate_binary_partitions(std::size_t num_states) {
  if (num_states < 2) return {};
  if (num_states > 16) throw InputError("binary partition enumeration is limited to 16 states");
  std::vector<Partition> out;
  // Fix state 0 in the first block so each partition appears once.
  for (Mask sub = 0; sub < (Mask{1} << (num_states - 1)) - 1; ++sub) {
    Mask first = 1 | (sub << 1);
    out.push_back(Partition::binary(num_states, Event{first}));
  }
  return out;
}

std::vector<Partition> enumerate_binary_partitions(const StateSpace& space) {
  return enumerate_binary_partitions(space.size());
}

}  // namespace msse
