#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttm/elab/types.hpp"
#include "ttm/syntax/ast.hpp"

namespace ttm::elab {

struct FlatVar {
  std::string name;
  Type type;
  syntax::Mode mode = syntax::Mode::Share;
  bool local = false;
  std::vector<std::int64_t> init;  // one value per slot
  SourceLoc loc;
};

struct FlatTimer {
  std::string name;
  std::int64_t bound = 0;
  std::int64_t init = 0;
};

struct FlatIndex {
  std::string name;
  Domain domain;
};

/// One guarded write of a projection. `condition` is the conjunction of the
/// enclosing if-arms; `index` selects an array element; a demonic write picks
/// any value of the domain held in `value`.
struct GuardedWrite {
  syntax::Expr condition = syntax::Expr::boolean(true);
  std::optional<syntax::Expr> index;
  bool demonic = false;
  syntax::Expr value;
  SourceLoc loc;
};

struct Projection {
  std::string var;
  std::vector<GuardedWrite> writes;
};

struct FlatEvent {
  std::string id;
  std::vector<FlatIndex> f_ind;
  std::vector<FlatIndex> d_ind;
  std::int64_t l = 0;
  std::optional<std::int64_t> u;  // nullopt: infinity
  syntax::Fairness fair = syntax::Fairness::Spontaneous;
  syntax::Expr guard = syntax::Expr::boolean(true);
  std::vector<std::string> start;
  std::vector<std::string> stop;
  std::vector<Projection> action;  // in evaluation order
  std::vector<std::pair<std::string, std::string>> action_edges;  // (before, after)
  std::vector<std::string> members;  // qualified source events; one entry unless compound
  SourceLoc loc;

  bool compound() const { return members.size() > 1; }
};

struct FlatPredicate {
  std::string name;
  std::vector<std::pair<std::string, Domain>> params;
  syntax::Expr body;
};

struct Graph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
};

struct SyncSet {
  std::vector<std::string> members;  // instance-qualified events, root first
  std::string compound_name;
  std::vector<std::string> module_component;
};

/// A single flattened module instance (V, s0, T, t0, E) plus the lookup
/// tables needed to evaluate its expressions.
struct FlatModel {
  std::vector<FlatVar> vars;      // sorted by name
  std::vector<FlatTimer> timers;  // sorted by name
  std::vector<FlatEvent> events;  // sorted by id
  std::vector<FlatPredicate> predicates;
  std::map<std::string, Domain> sets;
  std::map<std::string, std::int64_t> constants;
  SymbolTable symbols;

  Graph module_graph;
  Graph event_graph;
  std::vector<SyncSet> sync_sets;

  const FlatVar* find_var(std::string_view name) const;
  const FlatTimer* find_timer(std::string_view name) const;
  const FlatEvent* find_event(std::string_view name) const;
  const FlatPredicate* find_predicate(std::string_view name) const;

  /// Evaluates a constant set expression: a named set, `{...}`, `a..b` or `bool`.
  /// Throws Error(UnknownSet) when it does not denote a finite constant set.
  Domain eval_set(const syntax::Expr& e) const;
  /// Constant scalar: literal, constant, symbol, or arithmetic over those.
  std::optional<std::int64_t> try_const(const syntax::Expr& e) const;

  /// Human-readable rendering of a value drawn from `d`.
  std::string render(const Domain& d, std::int64_t v) const;
};

/// Deterministic JSON document (sorted keys) describing the model and its
/// dependency graphs.
std::string dump_json(const FlatModel& m, int indent = 2);

/// Stable 64-bit fingerprint of the canonical dump.
std::uint64_t model_hash(const FlatModel& m);

}  // namespace ttm::elab
