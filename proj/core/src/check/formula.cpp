#include "ttm/check/formula.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "ttm/syntax/parser.hpp"
#include "ttm/syntax/printer.hpp"

namespace ttm::check {

using elab::Domain;
using elab::FlatModel;
using syntax::Expr;
using syntax::ExprKind;
using syntax::Op;

namespace {

Domain type_domain(const syntax::TypeExpr& t, const FlatModel& m) {
  using K = syntax::TypeExpr::Kind;
  switch (t.kind) {
    case K::Bool: return Domain::boolean();
    case K::Named: {
      if (t.name == "bool" || t.name == "BOOL") return Domain::boolean();
      if (auto it = m.sets.find(t.name); it != m.sets.end()) return it->second;
      throw Error(ErrorKind::UnknownSet, fmt::format("unknown set '{}'", t.name), t.loc);
    }
    case K::Range: {
      Expr r;
      r.kind = ExprKind::Range;
      r.kids = t.exprs;
      r.loc = t.loc;
      return m.eval_set(r);
    }
    case K::Set: {
      Expr s;
      s.kind = ExprKind::SetLit;
      s.kids = t.exprs;
      s.loc = t.loc;
      return m.eval_set(s);
    }
    case K::Union: {
      Domain d = type_domain(t.parts.at(0), m);
      for (std::size_t i = 1; i < t.parts.size(); ++i)
        for (auto v : type_domain(t.parts[i], m).values)
          if (!d.contains(v)) d.values.push_back(v);
      return d;
    }
    default: break;
  }
  throw Error(ErrorKind::UnknownSet, "property parameters range over scalar sets", t.loc);
}

Domain set_domain(const Expr& e, const FlatModel& m) {
  if (e.kind == ExprKind::Name && (e.name == "bool" || e.name == "BOOL")) return Domain::boolean();
  return m.eval_set(e);
}

Expr subst(const Expr& e, const std::string& var, const Expr& value) {
  if (e.kind == ExprKind::Name && e.name == var && !e.primed) {
    Expr v = value;
    v.loc = e.loc;
    return v;
  }
  Expr out = e;
  if (e.kind == ExprKind::Fold) {
    out.kids[0] = subst(e.kids[0], var, value);
    if (e.name != var) out.kids[1] = subst(e.kids[1], var, value);
    return out;
  }
  for (auto& k : out.kids) k = subst(k, var, value);
  return out;
}

Expr fold_list(Op op, std::vector<Expr> parts, SourceLoc loc) {
  if (parts.empty()) return Expr::boolean(op == Op::And, loc);
  Expr acc = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Expr::binary(op, std::move(acc), std::move(parts[i]), loc);
  return acc;
}

class Expander {
 public:
  explicit Expander(const FlatModel& m) : m_(m) {}

  Expr run(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Fold:
        if (e.op == Op::Forall || e.op == Op::Exists) {
          Domain d = set_domain(e.kids[0], m_);
          std::vector<Expr> parts;
          for (auto v : d.values) parts.push_back(run(subst(e.kids[1], e.name, literal(m_, d, v))));
          return fold_list(e.op == Op::Forall ? Op::And : Op::Or, std::move(parts), e.loc);
        } else {
          set_domain(e.kids[0], m_);
          Expr out = e;
          bound_.push_back(e.name);
          out.kids[1] = run(e.kids[1]);
          bound_.pop_back();
          return out;
        }
      case ExprKind::Name: {
        if (std::find(bound_.begin(), bound_.end(), e.name) != bound_.end()) return e;
        if (e.primed) throw Error(ErrorKind::TypeError, fmt::format("primed name '{}' in a property", e.name), e.loc);
        std::string full = resolve(e.name, e.loc);
        if (const auto* ev = m_.find_event(full)) return event_atom(*ev, {}, e.loc);
        Expr out = e;
        out.name = full;
        return out;
      }
      case ExprKind::Call: {
        if (m_.find_predicate(e.name)) {
          Expr out = e;
          for (auto& k : out.kids) k = run(k);
          return out;
        }
        if (e.name == "mono") {
          if (e.kids.size() != 1 || e.kids[0].kind != ExprKind::Name)
            throw Error(ErrorKind::ArityError, "mono() takes one timer name", e.loc);
          std::string t = resolve(e.kids[0].name, e.kids[0].loc);
          if (!m_.find_timer(t)) throw Error(ErrorKind::UnknownAtom, fmt::format("'{}' is not a timer", t), e.loc);
          Expr out = e;
          out.kids[0].name = t;
          return out;
        }
        std::string full = resolve(e.name, e.loc);
        const auto* ev = m_.find_event(full);
        if (!ev) throw Error(ErrorKind::UnknownAtom, fmt::format("'{}' is neither an event nor a predicate", e.name), e.loc);
        std::vector<Expr> args;
        for (const auto& k : e.kids) args.push_back(run(k));
        return event_atom(*ev, std::move(args), e.loc);
      }
      case ExprKind::Method: {
        Expr out = e;
        for (auto& k : out.kids) k = run(k);
        return out;
      }
      default: {
        Expr out = e;
        for (auto& k : out.kids) k = run(k);
        return out;
      }
    }
  }

 private:
  std::string resolve(const std::string& name, SourceLoc loc) const {
    if (m_.constants.count(name) || m_.symbols.find(name)) return name;
    if (m_.find_var(name) || m_.find_timer(name) || m_.find_event(name)) return name;
    if (m_.sets.count(name)) return name;
    std::vector<std::string> hits;
    const std::string tail = "." + name;
    auto consider = [&](const std::string& n) {
      if (n.size() > tail.size() && n.compare(n.size() - tail.size(), tail.size(), tail) == 0) hits.push_back(n);
    };
    for (const auto& v : m_.vars) consider(v.name);
    for (const auto& t : m_.timers) consider(t.name);
    for (const auto& ev : m_.events) consider(ev.id);
    if (hits.size() == 1) return hits.front();
    if (hits.empty()) throw Error(ErrorKind::UnknownAtom, fmt::format("unknown name '{}' in property", name), loc);
    throw Error(ErrorKind::UnknownAtom,
                fmt::format("'{}' is ambiguous in property: {}", name, fmt::join(hits, ", ")), loc);
  }

  Expr event_atom(const elab::FlatEvent& ev, std::vector<Expr> args, SourceLoc loc) const {
    const std::size_t nf = ev.f_ind.size(), nd = ev.d_ind.size();
    if (args.size() != nf && args.size() != nf + nd)
      throw Error(ErrorKind::ArityError,
                  fmt::format("event atom '{}' takes {} fair index value(s){}, {} given", ev.id, nf,
                              nd ? fmt::format(" optionally followed by {} demonic", nd) : std::string(), args.size()),
                  loc);
    std::vector<std::int64_t> vals;
    for (std::size_t i = 0; i < args.size(); ++i) {
      const Domain& d = i < nf ? ev.f_ind[i].domain : ev.d_ind[i - nf].domain;
      auto v = m_.try_const(args[i]);
      if (!v)
        throw Error(ErrorKind::UnknownAtom,
                    fmt::format("argument '{}' of event atom '{}' is not a constant", syntax::print(args[i]), ev.id),
                    args[i].loc);
      if (!d.contains(*v))
        throw Error(ErrorKind::UnknownAtom,
                    fmt::format("'{}' is not a value of index '{}' of '{}'", syntax::print(args[i]),
                                i < nf ? ev.f_ind[i].name : ev.d_ind[i - nf].name, ev.id),
                    args[i].loc);
      vals.push_back(*v);
    }
    auto make = [&](const std::vector<std::int64_t>& all) {
      Expr c;
      c.kind = ExprKind::Call;
      c.name = ev.id;
      c.loc = loc;
      for (std::size_t i = 0; i < all.size(); ++i)
        c.kids.push_back(literal(m_, i < nf ? ev.f_ind[i].domain : ev.d_ind[i - nf].domain, all[i]));
      return c;
    };
    if (args.size() == nf + nd) return make(vals);
    // e(x) stands for (exists y . e(x, y)).
    std::vector<Expr> parts;
    std::vector<std::size_t> idx(nd, 0);
    for (const auto& x : ev.d_ind)
      if (x.domain.empty()) return Expr::boolean(false, loc);
    while (true) {
      std::vector<std::int64_t> all = vals;
      for (std::size_t i = 0; i < nd; ++i) all.push_back(ev.d_ind[i].domain.values[idx[i]]);
      parts.push_back(make(all));
      std::size_t k = nd;
      while (k > 0 && ++idx[k - 1] == ev.d_ind[k - 1].domain.size()) idx[--k] = 0;
      if (k == 0) break;
    }
    return fold_list(Op::Or, std::move(parts), loc);
  }

  const FlatModel& m_;
  std::vector<std::string> bound_;
};

}  // namespace

Expr literal(const FlatModel& m, const Domain& d, std::int64_t v) {
  switch (d.kind) {
    case elab::ScalarKind::Symbol: return Expr::ident(m.symbols.name(v));
    case elab::ScalarKind::Bool: return Expr::boolean(v != 0);
    case elab::ScalarKind::Int: break;
  }
  return Expr::integer(v);
}

Expr expand_quantifiers(const Expr& f, const FlatModel& m) { return Expander(m).run(f); }

std::vector<PropertyInstance> instantiate(const syntax::PropertySource& p, const FlatModel& m) {
  Expr f;
  try {
    f = syntax::parse_formula(p.text);
  } catch (const Error& e) {
    // Report positions relative to the model file.
    std::vector<Diagnostic> ds = e.diagnostics();
    for (auto& d : ds) {
      d.message = fmt::format("in property '{}': {}", p.name, d.message);
      if (p.loc.known()) d.loc = p.loc;
    }
    throw Error(std::move(ds));
  }
  std::vector<Domain> doms;
  for (const auto& prm : p.params) doms.push_back(type_domain(prm.set, m));
  std::vector<PropertyInstance> out;
  std::vector<std::size_t> idx(doms.size(), 0);
  for (const auto& d : doms)
    if (d.empty()) return out;
  while (true) {
    Expr g = f;
    std::vector<std::string> shown;
    for (std::size_t i = 0; i < doms.size(); ++i) {
      auto v = doms[i].values[idx[i]];
      g = subst(g, p.params[i].name, literal(m, doms[i], v));
      shown.push_back(m.render(doms[i], v));
    }
    PropertyInstance inst;
    inst.name = p.name;
    inst.label = shown.empty() ? p.name : fmt::format("{}({})", p.name, fmt::join(shown, ", "));
    inst.formula = expand_quantifiers(g, m);
    out.push_back(std::move(inst));
    std::size_t k = doms.size();
    while (k > 0 && ++idx[k - 1] == doms[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

bool is_temporal_free(const Expr& e) {
  if (e.kind == ExprKind::Temporal) return false;
  return std::all_of(e.kids.begin(), e.kids.end(), [](const Expr& k) { return is_temporal_free(k); });
}

bool has_event_atoms(const Expr& f, const FlatModel& m) {
  if (f.kind == ExprKind::Call && !m.find_predicate(f.name) && f.name != "mono" && m.find_event(f.name)) return true;
  return std::any_of(f.kids.begin(), f.kids.end(), [&](const Expr& k) { return has_event_atoms(k, m); });
}

// ---------------------------------------------------------------- Ltl

int Ltl::make(LtlKind k, int a, int b) {
  auto kind_of = [&](int i) { return nodes_[static_cast<std::size_t>(i)].kind; };
  if (k == LtlKind::And || k == LtlKind::Or) {
    const LtlKind unit = k == LtlKind::And ? LtlKind::True : LtlKind::False;
    const LtlKind zero = k == LtlKind::And ? LtlKind::False : LtlKind::True;
    if (kind_of(a) == zero || kind_of(b) == zero) return make(zero);
    if (kind_of(a) == unit) return b;
    if (kind_of(b) == unit) return a;
    if (a == b) return a;
    if (a > b) std::swap(a, b);
  }
  LtlNode n{k, a, b};
  for (int i = 0; i < size(); ++i)
    if (nodes_[static_cast<std::size_t>(i)] == n) return i;
  nodes_.push_back(n);
  return size() - 1;
}

int Ltl::atom(const Expr& e, bool neg) {
  if (e.kind == ExprKind::BoolLit) return make((e.value != 0) != neg ? LtlKind::True : LtlKind::False);
  std::string key = syntax::print(e);
  auto it = std::find(atom_keys_.begin(), atom_keys_.end(), key);
  int id;
  if (it == atom_keys_.end()) {
    atom_keys_.push_back(key);
    atoms_.push_back(e);
    id = static_cast<int>(atoms_.size()) - 1;
  } else {
    id = static_cast<int>(it - atom_keys_.begin());
  }
  return make(neg ? LtlKind::NotAtom : LtlKind::Atom, id);
}

int Ltl::build(const Expr& e, bool neg) {
  if (is_temporal_free(e)) return atom(e, neg);
  switch (e.kind) {
    case ExprKind::Temporal: {
      if (e.op == Op::Always) {
        int k = build(e.kids[0], neg);
        return neg ? make(LtlKind::Until, make(LtlKind::True), k) : make(LtlKind::Release, make(LtlKind::False), k);
      }
      if (e.op == Op::Eventually) {
        int k = build(e.kids[0], neg);
        return neg ? make(LtlKind::Release, make(LtlKind::False), k) : make(LtlKind::Until, make(LtlKind::True), k);
      }
      int a = build(e.kids[0], neg), b = build(e.kids[1], neg);
      return make(neg ? LtlKind::Release : LtlKind::Until, a, b);
    }
    case ExprKind::Unary:
      if (e.op == Op::Not) return build(e.kids[0], !neg);
      break;
    case ExprKind::Binary:
      if (e.op == Op::And || e.op == Op::Or) {
        int a = build(e.kids[0], neg), b = build(e.kids[1], neg);
        bool conj = (e.op == Op::And) != neg;
        return make(conj ? LtlKind::And : LtlKind::Or, a, b);
      }
      if (e.op == Op::Implies) {
        int a = build(e.kids[0], !neg), b = build(e.kids[1], neg);
        return make(neg ? LtlKind::And : LtlKind::Or, a, b);
      }
      break;
    default:
      break;
  }
  throw Error(ErrorKind::TypeError,
              fmt::format("temporal operator nested inside a state expression: '{}'", syntax::print(e)), e.loc);
}

Ltl Ltl::from(const Expr& f, bool negate) {
  Ltl l;
  l.root_ = l.build(f, negate);
  return l;
}

std::string Ltl::render(int i) const {
  const LtlNode& n = node(i);
  switch (n.kind) {
    case LtlKind::True: return "true";
    case LtlKind::False: return "false";
    case LtlKind::Atom: return fmt::format("({})", atom_keys_[static_cast<std::size_t>(n.a)]);
    case LtlKind::NotAtom: return fmt::format("!({})", atom_keys_[static_cast<std::size_t>(n.a)]);
    case LtlKind::And: return fmt::format("({} and {})", render(n.a), render(n.b));
    case LtlKind::Or: return fmt::format("({} or {})", render(n.a), render(n.b));
    case LtlKind::Next: return fmt::format("X {}", render(n.a));
    case LtlKind::Until: return fmt::format("({} U {})", render(n.a), render(n.b));
    case LtlKind::Release: return fmt::format("({} R {})", render(n.a), render(n.b));
  }
  return {};
}

}  // namespace ttm::check
