#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttm/elab/flat_model.hpp"
#include "ttm/syntax/ast.hpp"

namespace ttm::elab {

struct ElabOptions {
  /// Also add action-graph edges for unprimed right-hand-side references
  /// (self references excluded). Only changes which models are rejected as
  /// CircularDataFlow; evaluation order is unaffected.
  bool strict_action_edges = false;
};

/// Use of a global variable (or one constant element of it) by an instance.
struct VarUse {
  std::string var;
  std::optional<std::int64_t> element;
  syntax::Mode mode = syntax::Mode::In;
  SourceLoc loc;
};

/// An event after instantiation: every name is system-wide, indices keep
/// their declared names.
struct InstanceEvent {
  std::string instance;
  syntax::EventDecl decl;
  std::vector<std::string> sync_targets;  // "instance.event"
};

/// A (possibly composite) module instance prior to sync resolution.
struct Instance {
  std::vector<std::string> names;                  // member instance names
  std::map<std::string, std::string> modules;      // instance -> module
  std::map<std::string, std::map<std::string, std::string>> deps;  // instance -> slot -> instance
  std::vector<VarUse> uses;
  std::vector<FlatVar> locals;
  std::vector<FlatTimer> timers;
  std::vector<InstanceEvent> events;
};

std::optional<syntax::Mode> combine_modes(syntax::Mode a, syntax::Mode b);

/// Elaboration context for one source model. Each step is exposed so that it
/// can be exercised on its own; flatten() runs them all.
class Elaborator {
 public:
  explicit Elaborator(const syntax::SourceModel& src, ElabOptions opts = {});

  /// `prefix` is prepended to locals, timers and events ("" for none).
  Instance instantiate(const syntax::InstanceDecl& decl, const std::string& prefix) const;
  Instance compose(Instance a, Instance b) const;
  Instance iterated_compose(const std::string& var, const syntax::TypeExpr& set,
                            const syntax::InstanceDecl& templ) const;
  Instance compose_system() const;

  /// Module graph, module-level event graph and instance-level sync sets.
  void build_dependency_graphs(const Instance& sys, FlatModel& out) const;
  FlatEvent resolve_sync(const SyncSet& set, const Instance& sys) const;
  /// Compiles one non-synchronized event.
  FlatEvent flatten_event(const InstanceEvent& ev) const;

  FlatModel flatten() const;

  const FlatModel& tables() const { return base_; }

 private:
  struct Member {
    std::string instance;
    const syntax::EventDecl* decl;
  };
  FlatEvent merge(const std::string& id, const std::vector<Member>& members, bool prefix_indices) const;
  Type resolve_type(const syntax::TypeExpr& t) const;
  Domain resolve_domain(const syntax::TypeExpr& t) const;
  std::vector<std::int64_t> initial_slots(const Type& t, const std::optional<syntax::Expr>& init,
                                          SourceLoc loc) const;

  const syntax::SourceModel& src_;
  ElabOptions opts_;
  mutable FlatModel base_;  // constants, symbols, sets, predicates, globals
  mutable std::map<std::string, FlatVar> globals_;  // grows when an argument names an undeclared global
  bool single_module_ = false;
};

FlatModel flatten(const syntax::SourceModel& src, ElabOptions opts = {});

}  // namespace ttm::elab
