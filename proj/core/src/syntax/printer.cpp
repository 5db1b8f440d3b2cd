#include "ttm/syntax/printer.hpp"

#include <fmt/format.h>

namespace ttm::syntax {
namespace {

// Binding strength; larger binds tighter.
constexpr int kFold = 1;
constexpr int kImplies = 2;
constexpr int kOr = 3;
constexpr int kAnd = 4;
constexpr int kUntil = 5;
constexpr int kEquality = 6;
constexpr int kRelational = 7;
constexpr int kAdditive = 8;
constexpr int kMultiplicative = 9;
constexpr int kUnary = 10;
constexpr int kPostfix = 11;

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
      return e.value < 0 ? kUnary : kPostfix + 1;
    case ExprKind::Fold:
      return kFold;
    case ExprKind::Unary:
      return kUnary;
    case ExprKind::Temporal:
      return e.op == Op::Until ? kUntil : kUnary;
    case ExprKind::Range:
    case ExprKind::ArrayOf:
      return kAdditive;
    case ExprKind::Binary:
      switch (e.op) {
        case Op::Implies: return kImplies;
        case Op::Or: return kOr;
        case Op::And: return kAnd;
        case Op::Eq:
        case Op::Ne: return kEquality;
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge:
        case Op::In: return kRelational;
        case Op::Add:
        case Op::Sub: return kAdditive;
        default: return kMultiplicative;
      }
    case ExprKind::Index:
    case ExprKind::Method:
      return kPostfix;
    default:
      return kPostfix + 1;
  }
}

std::string wrap(const Expr& e, int min_prec) {
  std::string s = print(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string print_set(const Expr& e) {
  if (e.kind == ExprKind::Range || e.kind == ExprKind::ArrayOf) return print(e);
  return wrap(e, kAdditive);
}

std::string join_exprs(const std::vector<Expr>& xs, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < xs.size(); ++i) {
    if (i > from) out += ", ";
    out += print(xs[i]);
  }
  return out;
}

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

std::string print_stmts(const std::vector<Stmt>& body) {
  std::vector<std::string> parts;
  for (const auto& s : body) parts.push_back(print(s));
  return join(parts, ", ");
}

std::string print_indices(const std::vector<IndexDecl>& idx, bool fair) {
  std::vector<std::string> parts;
  for (const auto& d : idx) parts.push_back(fmt::format("{} : {}{}", d.name, fair ? "fair " : "", print(d.set)));
  return join(parts, "; ");
}

std::string print_instance(const InstanceDecl& inst) {
  std::vector<std::string> args;
  for (const auto& a : inst.args) args.push_back(fmt::format("{} {}", to_string(a.mode), wrap(a.value, kAdditive)));
  std::string out = fmt::format("{}({})", inst.module, join(args, ", "));
  if (!inst.with.empty()) {
    std::vector<std::string> ws;
    for (const auto& w : inst.with) ws.push_back(fmt::format("{} := {}", w.slot, w.instance));
    out += " with " + join(ws, ", ") + " end";
  }
  return out;
}

std::string init_suffix(const std::optional<Expr>& init) {
  return init ? " = " + print(*init) : std::string();
}

}  // namespace

std::string print(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
      return std::to_string(e.value);
    case ExprKind::BoolLit:
      return e.value ? "true" : "false";
    case ExprKind::Name:
      return e.primed ? e.name + "'" : e.name;
    case ExprKind::Index:
      return fmt::format("{}[{}]", wrap(e.kids[0], kPostfix), print(e.kids[1]));
    case ExprKind::Unary: {
      std::string operand = wrap(e.kids[0], kUnary);
      if (e.op == Op::Neg && (operand.front() == '-')) operand = "(" + operand + ")";
      return std::string(op_symbol(e.op)) + operand;
    }
    case ExprKind::Binary: {
      int p = precedence(e);
      bool right_assoc = e.op == Op::Implies;
      bool non_assoc = p == kEquality;
      int lmin = right_assoc || non_assoc ? p + 1 : p;
      int rmin = right_assoc ? p : p + 1;
      const Expr& rhs = e.kids[1];
      std::string r = e.op == Op::In ? print_set(rhs) : wrap(rhs, rmin);
      // `a => forall ...` parses without parentheses; keep them anyway for readability.
      return fmt::format("{} {} {}", wrap(e.kids[0], lmin), op_symbol(e.op), r);
    }
    case ExprKind::Fold: {
      std::string_view sym = e.op == Op::And ? "&&" : e.op == Op::Or ? "||" : op_symbol(e.op);
      return fmt::format("({} {} : {} @ {})", sym, e.name, print_set(e.kids[0]), print(e.kids[1]));
    }
    case ExprKind::Call:
      return fmt::format("{}({})", e.name, join_exprs(e.kids));
    case ExprKind::Method:
      return fmt::format("{}.{}({})", wrap(e.kids[0], kPostfix), e.name, join_exprs(e.kids, 1));
    case ExprKind::SetLit:
      return fmt::format("{{{}}}", join_exprs(e.kids));
    case ExprKind::Range:
      return fmt::format("{}..{}", wrap(e.kids[0], kAdditive), wrap(e.kids[1], kAdditive + 1));
    case ExprKind::ArrayOf:
      return fmt::format("ARRAY[{}]({})", print_set(e.kids[0]), print(e.kids[1]));
    case ExprKind::Temporal:
      if (e.op == Op::Until)
        return fmt::format("{} U {}", wrap(e.kids[0], kUntil + 1), wrap(e.kids[1], kUntil));
      return fmt::format("{} {}", op_symbol(e.op), wrap(e.kids[0], kUnary));
  }
  return "?";
}

std::string print(const TypeExpr& t) {
  switch (t.kind) {
    case TypeExpr::Kind::Bool:
      return "bool";
    case TypeExpr::Kind::Range:
      return fmt::format("{}..{}", wrap(t.exprs[0], kAdditive), wrap(t.exprs[1], kAdditive + 1));
    case TypeExpr::Kind::Set:
      return fmt::format("{{{}}}", join_exprs(t.exprs));
    case TypeExpr::Kind::Named:
      return t.name;
    case TypeExpr::Kind::Array:
      return fmt::format("array[{}] of {}", print(t.parts[0]), print(t.parts[1]));
    case TypeExpr::Kind::Queue:
      return fmt::format("queue[{}]({})", print(t.parts[0]), print(t.exprs[0]));
    case TypeExpr::Kind::Union: {
      std::vector<std::string> parts;
      for (const auto& p : t.parts) parts.push_back(print(p));
      return join(parts, " + ");
    }
  }
  return "?";
}

std::string print(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Skip:
      return "skip";
    case StmtKind::Assign:
      return fmt::format("{} := {}", print(s.target), print(s.value));
    case StmtKind::Demonic:
      return fmt::format("{} :: {}", print(s.target), print_set(s.value));
    case StmtKind::If: {
      std::string out;
      for (std::size_t i = 0; i < s.conditions.size(); ++i)
        out += fmt::format("{} {} then {} ", i == 0 ? "if" : "elseif", print(s.conditions[i]),
                           print_stmts(s.branches[i]));
      if (s.has_else()) out += "else " + print_stmts(s.branches.back()) + " ";
      return out + "fi";
    }
  }
  return "?";
}

std::string print(const EventDecl& ev) {
  std::string out = "  " + ev.name;
  std::vector<std::string> idx;
  if (!ev.fair_indices.empty()) idx.push_back(print_indices(ev.fair_indices, true));
  if (!ev.demonic_indices.empty()) idx.push_back(print_indices(ev.demonic_indices, false));
  if (!idx.empty()) out += "(" + join(idx, "; ") + ")";
  if (ev.has_bounds)
    out += fmt::format(" [{}, {}]", print(ev.lower), ev.upper ? print(*ev.upper) : "*");
  if (ev.fairness != Fairness::Spontaneous) out += fmt::format(" {}", to_string(ev.fairness));
  out += "\n";
  if (ev.sync) {
    std::vector<std::string> ts;
    for (const auto& q : ev.sync->targets) ts.push_back(q.instance + "." + q.event);
    out += fmt::format("    sync {} as {}\n", join(ts, ", "), ev.sync->compound_name);
  }
  if (!ev.guard.is_true()) out += "    when " + print(ev.guard) + "\n";
  if (!ev.start.empty()) out += "    start " + join(ev.start, ", ") + "\n";
  if (!ev.stop.empty()) out += "    stop " + join(ev.stop, ", ") + "\n";
  if (!ev.action.empty()) out += "    do " + print_stmts(ev.action) + "\n";
  return out + "  end\n";
}

std::string print(const ModuleDecl& m) {
  std::string out = "module " + m.name + "\n";
  if (!m.interface.empty()) {
    out += "interface\n";
    for (const auto& v : m.interface)
      out += fmt::format("  {} : {} {}{};\n", v.name, to_string(v.mode), print(v.type), init_suffix(v.init));
  }
  if (!m.locals.empty()) {
    out += "local\n";
    for (const auto& v : m.locals) out += fmt::format("  {} : {}{};\n", v.name, print(v.type), init_suffix(v.init));
  }
  if (!m.timers.empty()) {
    out += "timers\n";
    for (const auto& t : m.timers) out += fmt::format("  {} : 0..{};\n", t.name, wrap(t.bound, kAdditive + 1));
  }
  if (!m.depends.empty()) {
    out += "depends\n";
    for (const auto& d : m.depends) out += fmt::format("  {} : {};\n", d.slot, d.module);
  }
  if (!m.events.empty()) {
    out += "events\n";
    for (const auto& ev : m.events) out += print(ev);
  }
  return out + "end\n";
}

std::string print(const CompositionExpr& c) {
  switch (c.kind) {
    case CompositionExpr::Kind::Ref:
      return c.name;
    case CompositionExpr::Kind::Inline:
      return print_instance(*c.inline_instance);
    case CompositionExpr::Kind::Iterated:
      return fmt::format("|| {} : {} @ {}", c.name, print(*c.set), print(c.parts.front()));
    case CompositionExpr::Kind::Parallel: {
      std::vector<std::string> parts;
      for (const auto& p : c.parts) {
        bool paren = p.kind == CompositionExpr::Kind::Parallel || p.kind == CompositionExpr::Kind::Iterated;
        parts.push_back(paren ? "(" + print(p) + ")" : print(p));
      }
      return join(parts, " || ");
    }
  }
  return "?";
}

std::string print(const SourceModel& m) {
  std::string out;
  for (const auto& t : m.types) out += fmt::format("type {} = {}\n", t.name, print(t.type));
  for (const auto& c : m.consts) out += fmt::format("const {} = {}\n", c.name, print(c.value));
  for (const auto& p : m.predicates) {
    std::vector<std::string> ps;
    for (const auto& a : p.params) ps.push_back(fmt::format("{} : {}", a.name, print(a.type)));
    out += fmt::format("predicate {}({}) = {}\n", p.name, join(ps, "; "), print(p.body));
  }
  if (!m.globals.empty()) {
    out += "variables\n";
    for (const auto& v : m.globals) out += fmt::format("  {} : {}{};\n", v.name, print(v.type), init_suffix(v.init));
    out += "end\n";
  }
  for (const auto& mod : m.modules) out += "\n" + print(mod);
  if (!m.instances.empty() || !m.groups.empty()) {
    std::vector<std::string> items;
    for (const auto& i : m.instances) items.push_back(fmt::format("  {} = {}", i.name, print_instance(i)));
    for (const auto& g : m.groups) items.push_back(fmt::format("  {} ::= {}", g.name, join(g.members, " || ")));
    out += "\ninstances\n" + join(items, ";\n") + "\nend\n";
  }
  if (m.system) out += "\nsystem = " + print(*m.system) + "\n";
  if (!m.properties.empty()) {
    out += "\nproperties\n";
    for (const auto& p : m.properties) {
      std::string params;
      if (!p.params.empty()) params = "(" + print_indices(p.params, false) + ")";
      out += fmt::format("  {}{} : {};\n", p.name, params, p.text);
    }
    out += "end\n";
  }
  return out;
}

}  // namespace ttm::syntax
