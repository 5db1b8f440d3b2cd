#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ttm/check/checker.hpp"
#include "ttm/lts/lts.hpp"

namespace ttm::sim {

struct Step {
  lts::TransitionName name;
  std::size_t choice = 0;  // index among the transition's successors
  lts::Configuration config;
  std::uint64_t digest = 0;
};

struct EnabledTransition {
  lts::TransitionName name;
  std::string label;
  /// Tick: the clocks and timers that would advance. Otherwise empty.
  std::vector<std::string> advances;
  std::size_t choices = 1;  // number of successors
};

/// A single-owner simulation session over one system.
class Session {
 public:
  Session(std::shared_ptr<const lts::System> sys, std::uint64_t seed = 0);

  const lts::System& system() const { return *sys_; }
  std::shared_ptr<const lts::System> system_ptr() const { return sys_; }
  std::uint64_t seed() const { return seed_; }

  const lts::Configuration& current() const { return history_.empty() ? initial_ : history_.back().config; }
  const lts::Configuration& initial() const { return initial_; }
  const std::vector<Step>& history() const { return history_; }
  /// Steps undone by undo() or held back by a lasso import; redo() replays them.
  const std::vector<Step>& forward() const { return forward_; }
  std::optional<std::size_t> loop_start() const { return loop_start_; }

  std::vector<EnabledTransition> enabled() const;
  std::vector<lts::Successor> successors(const lts::TransitionName& t) const;

  /// Fires `t`. Without a choice, a demonic successor is drawn from the
  /// session's generator. Throws NotEnabled or BadChoice.
  const lts::Configuration& fire(const lts::TransitionName& t, std::optional<std::size_t> choice = std::nullopt);
  /// Parses the rendering of a transition and fires it.
  const lts::Configuration& fire(std::string_view transition, std::optional<std::size_t> choice = std::nullopt);
  /// Undoes the last `k` steps; throws BadIndex when k exceeds the history.
  void undo(std::size_t k = 1);
  /// Replays the next held-back step; returns false when none is left.
  bool redo();
  /// Fires up to `steps` uniformly drawn transitions; stops at a deadlock.
  std::size_t random_walk(std::size_t steps);

  /// Canonical JSON of the current configuration plus session metadata.
  std::string state_json() const;

  /// Line-delimited JSON trace of the history (and held-back steps).
  std::string export_trace() const;
  /// Replays a trace, validating the model hash and the digest chain.
  /// Throws ModelMismatch or ReplayDivergence. A trace with a loop start
  /// leaves the session at the loop start, the cycle held for redo().
  static Session import_trace(std::shared_ptr<const lts::System> sys, std::string_view text);

  std::uint64_t model_hash() const { return model_hash_; }

 private:
  std::size_t draw(std::size_t n);

  std::shared_ptr<const lts::System> sys_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::uint64_t model_hash_;
  lts::Configuration initial_;
  std::vector<Step> history_;
  std::vector<Step> forward_;
  std::optional<std::size_t> loop_start_;
};

/// Trace of a checker counterexample, in the session trace format.
std::string counterexample_trace(const lts::System& sys, const check::Counterexample& cex);

std::string hex(std::uint64_t v);

}  // namespace ttm::sim
