#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ttm/elab/flat_model.hpp"
#include "ttm/lts/eval.hpp"

namespace ttm::lts {

/// Packed configuration (s, t, m, c, x, p):
///   [variable slots][timer values][monotonicity flags][event clocks][x][p kind][p demonic]
/// x is -1 (bottom) or a clock slot. p kind is -1 (bottom), -2 (tick),
/// 2*slot (e#) or 2*slot+1 (e); p demonic is the demonic valuation ordinal.
using Configuration = std::vector<Value>;

struct TransitionName {
  enum class Kind : std::uint8_t { Hash, Event, Tick };
  Kind kind = Kind::Tick;
  int slot = -1;     // clock slot = (event, fair valuation); unused for Tick
  int demonic = 0;   // demonic valuation ordinal; Event only

  static TransitionName tick() { return {}; }
  static TransitionName hash(int slot) { return {Kind::Hash, slot, 0}; }
  static TransitionName event(int slot, int demonic) { return {Kind::Event, slot, demonic}; }

  auto operator<=>(const TransitionName&) const = default;
};

struct Successor {
  TransitionName name;
  Configuration config;
};

/// One implicit clock: an event together with a valuation of its fair indices.
struct ClockSlot {
  int event = 0;
  int fair = 0;  // ordinal of the fair valuation
  std::vector<std::int64_t> values;
};

class Compiled;

/// The labelled transition system of a flat model.
///
/// Construction copies the model and compiles every guard and action;
/// afterwards all members are const and safe to call concurrently.
class System {
 public:
  explicit System(const elab::FlatModel& model);
  ~System();
  System(System&&) noexcept;

  const elab::FlatModel& model() const { return *model_; }

  int width() const;
  int var_offset(int var) const;
  int timer_offset(int timer) const;
  int mono_offset(int timer) const;
  int clock_offset(int slot) const;
  int x_offset() const;
  int p_offset() const;

  int slot_count() const;
  const ClockSlot& slot(int s) const;
  /// First slot of an event; its fair valuations occupy consecutive slots.
  int first_slot(int event) const;
  int fair_count(int event) const;
  int demonic_count(int event) const;
  const std::vector<std::int64_t>& demonic_values(int event, int ordinal) const;
  /// Slot of `event` with the given fair values, or -1.
  int find_slot(int event, const std::vector<std::int64_t>& fair) const;
  int find_demonic(int event, const std::vector<std::int64_t>& values) const;

  Configuration initial() const;

  /// e.en(x) for the slot's event and valuation.
  bool enabled_slot(const Value* c, int slot) const;
  /// ∃y • e.grd(x,y) in the configuration's state and timers.
  bool guard(const Value* s, int slot) const;
  std::vector<TransitionName> enabled(const Configuration& c) const;

  /// Throws NotEnabled when `t` is not enabled, EvaluationError when the
  /// action fails (e.g. dequeue of an empty queue).
  std::vector<Successor> step(const Configuration& c, const TransitionName& t) const;
  /// All successors of every enabled transition, in enabled() order.
  void successors(const Value* c, std::vector<Successor>& out) const;
  /// Appends the successor configurations (without names) to `out`.
  void successor_configs(const Value* c, std::vector<Value>& out) const;

  TransitionName last(const Value* c) const;
  bool has_last(const Value* c) const { return c[p_offset()] != -1; }

  std::string render(const TransitionName& t) const;
  /// "e(A)": the event and fair values of a clock slot.
  std::string slot_name(int slot) const;
  /// Parses the rendering produced by render().
  std::optional<TransitionName> parse_transition(std::string_view text) const;

  /// Canonical JSON of a configuration (sorted keys, symbolic values).
  std::string to_json(const Configuration& c, int indent = -1) const;
  std::string describe(const Configuration& c) const;
  /// 64-bit stable digest of the canonical serialization.
  std::uint64_t digest(const Configuration& c) const;

  /// Checks the configuration invariants (timer range, clock range, x/p
  /// discipline); returns an empty string when they hold.
  std::string violated_invariant(const Value* c) const;

  /// Binding of a variable or timer name for expression compilation.
  Binding binding(const std::string& name, bool primed) const;

 private:
  std::shared_ptr<const elab::FlatModel> model_;
  std::unique_ptr<Compiled> impl_;
};

}  // namespace ttm::lts
