#include "ttm/syntax/ast.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ttm/syntax/parser.hpp"

namespace ttm::syntax {

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::None: return "";
    case Op::Not: return "!";
    case Op::Neg: return "-";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Implies: return "=>";
    case Op::In: return "in";
    case Op::Always: return "[]";
    case Op::Eventually: return "<>";
    case Op::Until: return "U";
    case Op::Forall: return "forall";
    case Op::Exists: return "exists";
  }
  return "?";
}

Expr Expr::integer(std::int64_t v, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::IntLit;
  e.value = v;
  e.loc = loc;
  return e;
}

Expr Expr::boolean(bool v, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::BoolLit;
  e.value = v ? 1 : 0;
  e.loc = loc;
  return e;
}

Expr Expr::ident(std::string n, SourceLoc loc, bool primed) {
  Expr e;
  e.kind = ExprKind::Name;
  e.name = std::move(n);
  e.primed = primed;
  e.loc = loc;
  return e;
}

Expr Expr::unary(Op op, Expr operand, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.op = op;
  e.loc = loc;
  e.kids.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.op = op;
  e.loc = loc;
  e.kids.push_back(std::move(lhs));
  e.kids.push_back(std::move(rhs));
  return e;
}

Expr Expr::index(Expr base, Expr idx, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Index;
  e.loc = loc;
  e.kids.push_back(std::move(base));
  e.kids.push_back(std::move(idx));
  return e;
}

Expr Expr::fold(Op op, std::string var, Expr set, Expr body, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Fold;
  e.op = op;
  e.name = std::move(var);
  e.loc = loc;
  e.kids.push_back(std::move(set));
  e.kids.push_back(std::move(body));
  return e;
}

Expr Expr::temporal(Op op, std::vector<Expr> kids, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Temporal;
  e.op = op;
  e.loc = loc;
  e.kids = std::move(kids);
  return e;
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::In: return "in";
    case Mode::Out: return "out";
    case Mode::Share: return "share";
  }
  return "?";
}

std::string_view to_string(Fairness f) {
  switch (f) {
    case Fairness::Spontaneous: return "spontaneous";
    case Fairness::Just: return "just";
    case Fairness::Compassionate: return "compassionate";
  }
  return "?";
}

namespace {
template <typename T>
const T* find_named(const std::vector<T>& items, std::string_view n) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.name == n; });
  return it == items.end() ? nullptr : &*it;
}
}  // namespace

const EventDecl* ModuleDecl::find_event(std::string_view n) const { return find_named(events, n); }
const ModuleDecl* SourceModel::find_module(std::string_view n) const { return find_named(modules, n); }
const InstanceDecl* SourceModel::find_instance(std::string_view n) const { return find_named(instances, n); }
const GroupDecl* SourceModel::find_group(std::string_view n) const { return find_named(groups, n); }
const PropertySource* SourceModel::find_property(std::string_view n) const {
  return find_named(properties, n);
}

std::map<std::string, std::int64_t> SourceModel::constants() const {
  std::map<std::string, std::int64_t> out;
  for (const auto& c : consts) out[c.name] = eval_const(c.value, out);
  return out;
}

}  // namespace ttm::syntax
