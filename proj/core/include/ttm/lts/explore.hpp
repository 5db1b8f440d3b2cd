#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ttm/lts/lts.hpp"

namespace ttm::lts {

struct ExploreOptions {
  std::size_t max_states = 2'000'000;
  std::size_t max_bytes = std::size_t{2} << 30;
  int workers = 1;
  /// Canonicalize the last-transition component. Sound only for formulas
  /// without event atoms; edge labels are then recovered by search.
  bool ignore_last = false;
  bool keep_edges = true;
};

struct ExploreStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t peak_frontier = 0;
  std::size_t depth = 0;
  std::size_t deadlocks = 0;
  double seconds = 0;
};

/// Deduplicating store of fixed-width configurations. Ids are dense and
/// assigned in insertion order.
class StateStore {
 public:
  explicit StateStore(int width = 0);

  /// Returns (id, inserted).
  std::pair<std::uint32_t, bool> insert(const Value* c);
  /// Id of `c`, or -1.
  std::int64_t find(const Value* c) const;

  const Value* get(std::uint32_t id) const { return arena_.data() + static_cast<std::size_t>(id) * width_; }
  Configuration config(std::uint32_t id) const { return Configuration(get(id), get(id) + width_); }
  std::size_t size() const { return count_; }
  int width() const { return static_cast<int>(width_); }
  std::size_t bytes() const { return arena_.capacity() * sizeof(Value) + table_.capacity() * sizeof(std::uint32_t); }

 private:
  std::uint64_t hash(const Value* c) const;
  void grow();

  std::size_t width_ = 0;
  std::size_t count_ = 0;
  std::vector<Value> arena_;
  std::vector<std::uint32_t> table_;  // id + 1; 0 = empty
};

/// Reachable configuration graph in compressed sparse row form. Successor
/// lists follow System::successor_configs order; the initial configuration
/// has id 0.
struct LtsGraph {
  StateStore store;
  std::vector<std::uint64_t> offsets;  // size states + 1 when edges are kept
  std::vector<std::uint32_t> targets;
  std::vector<std::uint32_t> deadlocks;
  ExploreStats stats;
  bool ignore_last = false;

  std::size_t size() const { return store.size(); }
  const std::uint32_t* begin(std::uint32_t s) const { return targets.data() + offsets[s]; }
  const std::uint32_t* end(std::uint32_t s) const { return targets.data() + offsets[s + 1]; }
};

/// Canonicalizes the last-transition component in place.
void erase_last(const System& sys, Value* c);

/// Name of a transition from `from` to `to`. With canonicalized last
/// components the label is found by re-stepping `from`.
TransitionName edge_label(const System& sys, const Value* from, const Value* to, bool ignore_last);

/// Breadth-first reachability. Throws StateLimitExceeded (message carries
/// the partial statistics) when a limit is hit.
LtsGraph explore(const System& sys, const ExploreOptions& opts = {});

/// Deterministic JSON export (nodes = configuration dumps, edges = names).
std::string graph_json(const System& sys, const LtsGraph& g);

std::string format_stats(const ExploreStats& s);

}  // namespace ttm::lts
