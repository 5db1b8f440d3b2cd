#include "ttm/lts/eval.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ttm/syntax/printer.hpp"

namespace ttm::lts {

using syntax::Expr;
using syntax::ExprKind;
using syntax::Op;

void eval_error(const std::string& msg, SourceLoc loc) { throw Error(ErrorKind::EvaluationError, msg, loc); }

Lookup Lookup::of(const elab::Domain& d) {
  Lookup l;
  l.values = d.values;
  if (d.values.empty()) return l;
  auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
  l.min = *lo;
  l.pos.assign(static_cast<std::size_t>(*hi - *lo + 1), -1);
  for (std::size_t i = 0; i < d.values.size(); ++i) l.pos[static_cast<std::size_t>(d.values[i] - l.min)] = static_cast<int>(i);
  return l;
}

int Code::add_lookup(const elab::Domain& d) {
  if (d.size() > 0 && d.values.back() - d.values.front() > 10'000'000)
    throw Error(ErrorKind::TypeError, "domain too sparse to index");
  lookups_.push_back(Lookup::of(d));
  return static_cast<int>(lookups_.size()) - 1;
}

int Code::add_args(std::vector<std::pair<int, int>> args) {
  args_.push_back(std::move(args));
  return static_cast<int>(args_.size()) - 1;
}

std::int64_t Code::eval(int root, const Frame& f) const {
  const Node& n = nodes_[static_cast<std::size_t>(root)];
  switch (n.kind) {
    case NodeKind::Const:
      return n.v;
    case NodeKind::Read:
      return (n.v ? f.post : f.pre)[n.a];
    case NodeKind::Elem: {
      std::int64_t i = eval(n.b, f);
      int p = lookups_[static_cast<std::size_t>(n.c)].position(i);
      if (p < 0) eval_error(fmt::format("array index {} out of range", i), n.loc);
      return (n.v ? f.post : f.pre)[n.a + p];
    }
    case NodeKind::Env:
      return f.env[n.a];
    case NodeKind::Not:
      return !eval(n.a, f);
    case NodeKind::Neg:
      return -eval(n.a, f);
    case NodeKind::Bin: {
      switch (n.op) {
        case Op::And: return eval(n.a, f) && eval(n.b, f);
        case Op::Or: return eval(n.a, f) || eval(n.b, f);
        case Op::Implies: return !eval(n.a, f) || eval(n.b, f);
        default: break;
      }
      std::int64_t x = eval(n.a, f), y = eval(n.b, f);
      switch (n.op) {
        case Op::Add: return x + y;
        case Op::Sub: return x - y;
        case Op::Mul: return x * y;
        case Op::Div:
          if (!y) eval_error("division by zero", n.loc);
          return x / y;
        case Op::Mod:
          if (!y) eval_error("modulo by zero", n.loc);
          return x % y;
        case Op::Eq: return x == y;
        case Op::Ne: return x != y;
        case Op::Lt: return x < y;
        case Op::Le: return x <= y;
        case Op::Gt: return x > y;
        case Op::Ge: return x >= y;
        default: eval_error("unsupported operator", n.loc);
      }
    }
    case NodeKind::Fold: {
      const bool conj = n.op == Op::And;
      for (auto v : lookups_[static_cast<std::size_t>(n.c)].values) {
        f.env[n.a] = v;
        bool r = eval(n.b, f) != 0;
        if (r != conj) return r;
      }
      return conj;
    }
    case NodeKind::In:
      return lookups_[static_cast<std::size_t>(n.c)].position(eval(n.a, f)) >= 0;
    case NodeKind::QCount:
      return (n.v ? f.post : f.pre)[n.a];
    case NodeKind::QFirst: {
      const Value* q = (n.v ? f.post : f.pre) + n.a;
      if (q[0] == 0) eval_error("First() of an empty queue", n.loc);
      return q[1];
    }
    case NodeKind::Call: {
      const auto& args = args_[static_cast<std::size_t>(n.a)];
      std::int64_t vals[16];
      for (std::size_t i = 0; i < args.size(); ++i) vals[i] = eval(args[i].second, f);
      for (std::size_t i = 0; i < args.size(); ++i) f.env[args[i].first] = vals[i];
      return eval(n.b, f);
    }
    case NodeKind::Last:
      return f.pre[n.a] == n.v && (n.b < 0 || f.pre[n.a + 1] == n.b);
  }
  return 0;
}

// ---------------------------------------------------------------- compiler

Compiler::Compiler(const elab::FlatModel& model, Code& code, Resolver resolve, CallHook call)
    : model_(model), code_(code), resolve_(std::move(resolve)), call_(std::move(call)) {}

void Compiler::push(const std::string& name, int env_slot) { scope_.emplace_back(name, env_slot); }
void Compiler::pop() { scope_.pop_back(); }

elab::Domain Compiler::domain(const Expr& e) const { return model_.eval_set(e); }

int Compiler::scalar(const Expr& e) { return compile(e, 0); }

int Compiler::read(const Expr& e) {
  for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
    if (it->first == e.name) {
      if (e.primed) throw Error(ErrorKind::TypeError, fmt::format("index '{}' cannot be primed", e.name), e.loc);
      Node n;
      n.kind = NodeKind::Env;
      n.a = it->second;
      n.loc = e.loc;
      return code_.add(n);
    }
  if (auto c = model_.constants.find(e.name); c != model_.constants.end()) {
    Node n;
    n.kind = NodeKind::Const;
    n.v = c->second;
    return code_.add(n);
  }
  Binding b = resolve_(e.name, e.primed, e.loc);
  if (b.kind == Binding::Kind::None) {
    if (auto s = model_.symbols.find(e.name)) {
      Node n;
      n.kind = NodeKind::Const;
      n.v = *s;
      return code_.add(n);
    }
    throw Error(ErrorKind::UnknownReference, fmt::format("unknown name '{}'", e.name), e.loc);
  }
  Node n;
  n.loc = e.loc;
  switch (b.kind) {
    case Binding::Kind::Const:
      n.kind = NodeKind::Const;
      n.v = b.value;
      break;
    case Binding::Kind::Env:
      n.kind = NodeKind::Env;
      n.a = b.offset;
      break;
    case Binding::Kind::Scalar:
      n.kind = NodeKind::Read;
      n.a = b.offset;
      n.v = e.primed;
      break;
    case Binding::Kind::Last:
      n.kind = NodeKind::Last;
      n.a = b.offset;
      n.v = b.value;
      n.b = -1;
      break;
    case Binding::Kind::Array:
    case Binding::Kind::Queue:
      throw Error(ErrorKind::TypeError,
                  fmt::format("'{}' is {} and cannot be used as a scalar", e.name,
                              b.kind == Binding::Kind::Array ? "an array" : "a queue"),
                  e.loc);
    case Binding::Kind::None:
      break;
  }
  return code_.add(n);
}

int Compiler::compile(const Expr& e, int depth) {
  if (depth > 64) throw Error(ErrorKind::TypeError, "predicate calls nested too deeply (recursive predicate?)", e.loc);
  Node n;
  n.loc = e.loc;
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
      n.kind = NodeKind::Const;
      n.v = e.value;
      return code_.add(n);
    case ExprKind::Name:
      return read(e);
    case ExprKind::Index: {
      const Expr& base = e.kids[0];
      if (base.kind != ExprKind::Name)
        throw Error(ErrorKind::TypeError, fmt::format("'{}' cannot be indexed", syntax::print(base)), e.loc);
      Binding b = resolve_(base.name, base.primed, base.loc);
      if (b.kind != Binding::Kind::Array)
        throw Error(ErrorKind::TypeError, fmt::format("'{}' is not an array", base.name), base.loc);
      n.kind = NodeKind::Elem;
      n.a = b.offset;
      n.c = b.lookup;
      n.v = base.primed;
      int idx = compile(e.kids[1], depth);
      n.b = idx;
      return code_.add(n);
    }
    case ExprKind::Unary: {
      int a = compile(e.kids[0], depth);
      n.kind = e.op == Op::Not ? NodeKind::Not : NodeKind::Neg;
      n.a = a;
      return code_.add(n);
    }
    case ExprKind::Binary: {
      if (e.op == Op::In) {
        int a = compile(e.kids[0], depth);
        n.kind = NodeKind::In;
        n.a = a;
        n.c = code_.add_lookup(domain(e.kids[1]));
        return code_.add(n);
      }
      int a = compile(e.kids[0], depth);
      int b = compile(e.kids[1], depth);
      n.kind = NodeKind::Bin;
      n.op = e.op;
      n.a = a;
      n.b = b;
      return code_.add(n);
    }
    case ExprKind::Fold: {
      n.kind = NodeKind::Fold;
      n.op = (e.op == Op::And || e.op == Op::Forall) ? Op::And : Op::Or;
      n.c = code_.add_lookup(domain(e.kids[0]));
      n.a = code_.new_env();
      push(e.name, n.a);
      n.b = compile(e.kids[1], depth);
      pop();
      return code_.add(n);
    }
    case ExprKind::Call: {
      if (const elab::FlatPredicate* p = model_.find_predicate(e.name)) {
        if (p->params.size() != e.kids.size())
          throw Error(ErrorKind::ArityError,
                      fmt::format("predicate '{}' takes {} arguments, {} given", p->name, p->params.size(),
                                  e.kids.size()),
                      e.loc);
        if (e.kids.size() > 16) throw Error(ErrorKind::ArityError, "too many predicate arguments", e.loc);
        std::vector<std::pair<int, int>> args;
        for (const auto& k : e.kids) args.emplace_back(code_.new_env(), compile(k, depth + 1));
        auto saved = std::move(scope_);
        scope_.clear();
        for (std::size_t i = 0; i < args.size(); ++i) push(p->params[i].first, args[i].first);
        int body;
        try {
          body = compile(p->body, depth + 1);
        } catch (...) {
          scope_ = std::move(saved);
          throw;
        }
        scope_ = std::move(saved);
        n.kind = NodeKind::Call;
        n.a = code_.add_args(std::move(args));
        n.b = body;
        return code_.add(n);
      }
      if (call_)
        if (auto r = call_(e, *this)) return *r;
      throw Error(ErrorKind::UnknownReference, fmt::format("unknown predicate '{}'", e.name), e.loc);
    }
    case ExprKind::Method: {
      const Expr& recv = e.kids[0];
      if (recv.kind != ExprKind::Name)
        throw Error(ErrorKind::TypeError, "queue operations apply to a queue variable", e.loc);
      Binding b = resolve_(recv.name, recv.primed, recv.loc);
      if (b.kind != Binding::Kind::Queue)
        throw Error(ErrorKind::TypeError, fmt::format("'{}' is not a queue", recv.name), recv.loc);
      if (e.kids.size() != 1 && (e.name == "Count" || e.name == "First"))
        throw Error(ErrorKind::ArityError, fmt::format("{}() takes no arguments", e.name), e.loc);
      n.a = b.offset;
      n.v = recv.primed;
      if (e.name == "Count") n.kind = NodeKind::QCount;
      else if (e.name == "First") n.kind = NodeKind::QFirst;
      else if (e.name == "Enqueue" || e.name == "Dequeue")
        throw Error(ErrorKind::TypeError,
                    fmt::format("{}() yields a queue; use it as the whole right-hand side of an assignment", e.name),
                    e.loc);
      else
        throw Error(ErrorKind::UnknownReference, fmt::format("unknown queue operation '{}'", e.name), e.loc);
      return code_.add(n);
    }
    case ExprKind::SetLit:
    case ExprKind::Range:
    case ExprKind::ArrayOf:
      throw Error(ErrorKind::TypeError, fmt::format("set '{}' used as a value", syntax::print(e)), e.loc);
    case ExprKind::Temporal:
      throw Error(ErrorKind::TypeError, "temporal operator inside a state expression", e.loc);
  }
  throw Error(ErrorKind::TypeError, "malformed expression", e.loc);
}

}  // namespace ttm::lts
