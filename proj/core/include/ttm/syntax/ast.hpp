#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttm/diagnostics.hpp"

namespace ttm::syntax {

enum class ExprKind : std::uint8_t {
  IntLit,
  BoolLit,
  Name,      // `name`, or `name'` when primed
  Index,     // kids[0][kids[1]]
  Unary,     // op kids[0]
  Binary,    // kids[0] op kids[1]
  Fold,      // `&& name : kids[0] @ kids[1]`, `|| ...`, `forall`, `exists`
  Call,      // name(kids...): predicate call, event atom, mono(t)
  Method,    // kids[0].name(kids[1..])  (queue operations)
  SetLit,    // {kids...}
  Range,     // kids[0] .. kids[1]
  ArrayOf,   // ARRAY[kids[0]](kids[1])  (demonic whole-array domain)
  Temporal,  // [] kids[0], <> kids[0], kids[0] U kids[1]
};

enum class Op : std::uint8_t {
  None,
  Not,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Implies,
  In,
  Always,
  Eventually,
  Until,
  Forall,
  Exists,
};

std::string_view op_symbol(Op op);

/// Expressions of both the model language and the property language share
/// one node type.
struct Expr {
  ExprKind kind = ExprKind::BoolLit;
  Op op = Op::None;
  std::int64_t value = 0;
  std::string name;
  bool primed = false;
  std::vector<Expr> kids;
  SourceLoc loc;

  bool operator==(const Expr&) const = default;

  static Expr integer(std::int64_t v, SourceLoc loc = {});
  static Expr boolean(bool v, SourceLoc loc = {});
  static Expr ident(std::string n, SourceLoc loc = {}, bool primed = false);
  static Expr unary(Op op, Expr operand, SourceLoc loc = {});
  static Expr binary(Op op, Expr lhs, Expr rhs, SourceLoc loc = {});
  static Expr index(Expr base, Expr idx, SourceLoc loc = {});
  static Expr fold(Op op, std::string var, Expr set, Expr body, SourceLoc loc = {});
  static Expr temporal(Op op, std::vector<Expr> kids, SourceLoc loc = {});

  bool is_true() const { return kind == ExprKind::BoolLit && value != 0; }
};

enum class Mode : std::uint8_t { In, Out, Share };
std::string_view to_string(Mode m);

enum class Fairness : std::uint8_t { Spontaneous, Just, Compassionate };
std::string_view to_string(Fairness f);

struct TypeExpr {
  enum class Kind : std::uint8_t { Bool, Range, Set, Named, Array, Queue, Union };
  Kind kind = Kind::Bool;
  std::string name;              // Named
  std::vector<Expr> exprs;       // Range: lo, hi; Set: elements; Queue: capacity
  std::vector<TypeExpr> parts;   // Array: index, element; Queue: element; Union: operands
  SourceLoc loc;

  bool operator==(const TypeExpr&) const = default;
};

struct TypeDecl {
  std::string name;
  TypeExpr type;
  SourceLoc loc;
  bool operator==(const TypeDecl&) const = default;
};

struct ConstDecl {
  std::string name;
  Expr value;
  SourceLoc loc;
  bool operator==(const ConstDecl&) const = default;
};

struct Param {
  std::string name;
  TypeExpr type;
  SourceLoc loc;
  bool operator==(const Param&) const = default;
};

/// Named pure predicate over finite types; invoked as `p(x)` or `call(p, x)`.
struct PredicateDecl {
  std::string name;
  std::vector<Param> params;
  Expr body;
  SourceLoc loc;
  bool operator==(const PredicateDecl&) const = default;
};

struct VarDecl {
  std::string name;
  TypeExpr type;
  std::optional<Expr> init;
  SourceLoc loc;
  bool operator==(const VarDecl&) const = default;
};

struct InterfaceDecl {
  std::string name;
  Mode mode = Mode::In;
  TypeExpr type;
  std::optional<Expr> init;  // only used when the module is the whole system
  SourceLoc loc;
  bool operator==(const InterfaceDecl&) const = default;
};

/// `name : 0 .. bound`
struct TimerDecl {
  std::string name;
  Expr bound;
  SourceLoc loc;
  bool operator==(const TimerDecl&) const = default;
};

struct DependsDecl {
  std::string slot;
  std::string module;
  SourceLoc loc;
  bool operator==(const DependsDecl&) const = default;
};

struct IndexDecl {
  std::string name;
  TypeExpr set;
  SourceLoc loc;
  bool operator==(const IndexDecl&) const = default;
};

enum class StmtKind : std::uint8_t { Assign, Demonic, If, Skip };

struct Stmt {
  StmtKind kind = StmtKind::Skip;
  Expr target;                               // Assign, Demonic
  Expr value;                                // Assign: rhs; Demonic: domain
  std::vector<Expr> conditions;              // If: one per then/elseif arm
  std::vector<std::vector<Stmt>> branches;   // If: arms, plus trailing else arm
  SourceLoc loc;

  bool operator==(const Stmt&) const = default;
  bool has_else() const { return branches.size() > conditions.size(); }
};

struct QualifiedName {
  std::string instance;
  std::string event;
  SourceLoc loc;
  bool operator==(const QualifiedName&) const = default;
};

struct SyncClause {
  std::vector<QualifiedName> targets;
  std::string compound_name;
  SourceLoc loc;
  bool operator==(const SyncClause&) const = default;
};

struct EventDecl {
  std::string name;
  std::vector<IndexDecl> fair_indices;
  std::vector<IndexDecl> demonic_indices;
  bool has_bounds = false;
  Expr lower = Expr::integer(0);
  std::optional<Expr> upper;  // nullopt: unbounded (`*` or omitted)
  Fairness fairness = Fairness::Spontaneous;
  std::optional<SyncClause> sync;
  Expr guard = Expr::boolean(true);
  std::vector<std::string> start;
  std::vector<std::string> stop;
  std::vector<Stmt> action;
  SourceLoc loc;

  bool operator==(const EventDecl&) const = default;
};

struct ModuleDecl {
  std::string name;
  std::vector<InterfaceDecl> interface;
  std::vector<VarDecl> locals;
  std::vector<TimerDecl> timers;
  std::vector<DependsDecl> depends;
  std::vector<EventDecl> events;
  SourceLoc loc;

  bool operator==(const ModuleDecl&) const = default;
  const EventDecl* find_event(std::string_view n) const;
};

struct Argument {
  Mode mode = Mode::In;
  Expr value;
  SourceLoc loc;
  bool operator==(const Argument&) const = default;
};

struct DependencyBinding {
  std::string slot;
  std::string instance;
  SourceLoc loc;
  bool operator==(const DependencyBinding&) const = default;
};

struct InstanceDecl {
  std::string name;
  std::string module;
  std::vector<Argument> args;
  std::vector<DependencyBinding> with;
  SourceLoc loc;
  bool operator==(const InstanceDecl&) const = default;
};

/// `name ::= a || b || ...` renames a synchronized group of instances.
struct GroupDecl {
  std::string name;
  std::vector<std::string> members;
  SourceLoc loc;
  bool operator==(const GroupDecl&) const = default;
};

struct CompositionExpr {
  enum class Kind : std::uint8_t { Ref, Parallel, Iterated, Inline };
  Kind kind = Kind::Ref;
  std::string name;                     // Ref: instance/group; Iterated: bound index
  std::vector<CompositionExpr> parts;   // Parallel operands; Iterated: one Inline body
  std::optional<TypeExpr> set;          // Iterated
  std::optional<InstanceDecl> inline_instance;  // Inline (name left empty)
  SourceLoc loc;

  bool operator==(const CompositionExpr&) const = default;
};

struct PropertySource {
  std::string name;
  std::vector<IndexDecl> params;  // checked once per valuation
  std::string text;
  SourceLoc loc;
  bool operator==(const PropertySource&) const = default;
};

struct SourceModel {
  std::vector<TypeDecl> types;
  std::vector<ConstDecl> consts;
  std::vector<PredicateDecl> predicates;
  std::vector<VarDecl> globals;
  std::vector<ModuleDecl> modules;
  std::vector<InstanceDecl> instances;
  std::vector<GroupDecl> groups;
  std::optional<CompositionExpr> system;
  std::vector<PropertySource> properties;

  bool operator==(const SourceModel&) const = default;

  const ModuleDecl* find_module(std::string_view n) const;
  const InstanceDecl* find_instance(std::string_view n) const;
  const GroupDecl* find_group(std::string_view n) const;
  const PropertySource* find_property(std::string_view n) const;

  /// Values of all `const` declarations (evaluated in declaration order).
  std::map<std::string, std::int64_t> constants() const;
};

}  // namespace ttm::syntax
