#include "ttm/elab/elaborator.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include <fmt/format.h>

#include "ttm/syntax/printer.hpp"

namespace ttm::elab {

using syntax::CompositionExpr;
using syntax::EventDecl;
using syntax::Expr;
using syntax::ExprKind;
using syntax::Fairness;
using syntax::InstanceDecl;
using syntax::Mode;
using syntax::ModuleDecl;
using syntax::Op;
using syntax::Stmt;
using syntax::StmtKind;
using syntax::TypeExpr;

std::optional<Mode> combine_modes(Mode a, Mode b) {
  if (a == Mode::Out && b == Mode::Out) return std::nullopt;
  if (a == Mode::Share || b == Mode::Share) return Mode::Share;
  if (a == Mode::Out || b == Mode::Out) return Mode::Out;
  return Mode::In;
}

namespace {

using SubstMap = std::map<std::string, Expr>;

[[noreturn]] void fail(ErrorKind k, std::string msg, SourceLoc loc = {}) { throw Error(k, std::move(msg), loc); }

void prime(Expr& e) {
  if (e.kind == ExprKind::Name) e.primed = true;
  else if (e.kind == ExprKind::Index) prime(e.kids[0]);
}

Expr subst(const Expr& e, const SubstMap& map, std::vector<std::string>& bound) {
  if (e.kind == ExprKind::Name) {
    if (std::find(bound.begin(), bound.end(), e.name) != bound.end()) return e;
    auto it = map.find(e.name);
    if (it == map.end()) return e;
    Expr r = it->second;
    r.loc = e.loc;
    if (e.primed) prime(r);
    return r;
  }
  Expr r = e;
  if (e.kind == ExprKind::Fold) {
    r.kids[0] = subst(e.kids[0], map, bound);
    bound.push_back(e.name);
    r.kids[1] = subst(e.kids[1], map, bound);
    bound.pop_back();
    return r;
  }
  for (auto& k : r.kids) k = subst(k, map, bound);
  return r;
}

Expr subst(const Expr& e, const SubstMap& map) {
  std::vector<std::string> bound;
  return subst(e, map, bound);
}

Stmt subst(const Stmt& s, const SubstMap& map) {
  Stmt r = s;
  if (s.kind == StmtKind::Assign || s.kind == StmtKind::Demonic) {
    r.target = subst(s.target, map);
    r.value = subst(s.value, map);
  }
  for (auto& c : r.conditions) c = subst(c, map);
  for (auto& b : r.branches)
    for (auto& st : b) st = subst(st, map);
  return r;
}

/// Visits every free Name in `e`.
void for_each_name(const Expr& e, const std::function<void(const Expr&)>& fn, std::vector<std::string>& bound) {
  if (e.kind == ExprKind::Name) {
    if (std::find(bound.begin(), bound.end(), e.name) == bound.end()) fn(e);
    return;
  }
  if (e.kind == ExprKind::Fold) {
    for_each_name(e.kids[0], fn, bound);
    bound.push_back(e.name);
    for_each_name(e.kids[1], fn, bound);
    bound.pop_back();
    return;
  }
  for (const auto& k : e.kids) for_each_name(k, fn, bound);
}

void for_each_name(const Expr& e, const std::function<void(const Expr&)>& fn) {
  std::vector<std::string> bound;
  for_each_name(e, fn, bound);
}

bool has_prime(const Expr& e) {
  bool found = false;
  for_each_name(e, [&](const Expr& n) { found = found || n.primed; });
  return found;
}

Expr conj(Expr a, Expr b) {
  if (a.is_true()) return b;
  if (b.is_true()) return a;
  SourceLoc loc = a.loc;
  return Expr::binary(Op::And, std::move(a), std::move(b), loc);
}

const std::string& target_base(const Expr& target) {
  return target.kind == ExprKind::Index ? target_base(target.kids[0]) : target.name;
}

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

/// Finds a cycle in a directed graph given as adjacency lists; returns its
/// vertices in order, or empty.
std::vector<int> find_cycle(const std::vector<std::vector<int>>& adj) {
  int n = static_cast<int>(adj.size());
  std::vector<int> color(n, 0), parent(n, -1);
  for (int root = 0; root < n; ++root) {
    if (color[root]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < adj[v].size()) {
        int w = adj[v][i++];
        if (color[w] == 1) {
          std::vector<int> cyc{w};
          for (int x = v; x != w; x = parent[x]) cyc.push_back(x);
          std::reverse(cyc.begin() + 1, cyc.end());
          return cyc;
        }
        if (color[w] == 0) {
          color[w] = 1;
          parent[w] = v;
          stack.emplace_back(w, 0);
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return {};
}

struct WriteInfo {
  std::string var;
  bool whole = true;
  std::optional<std::int64_t> const_index;
  GuardedWrite gw;
};

bool overlaps(const WriteInfo& a, const WriteInfo& b) {
  if (a.var != b.var) return false;
  if (a.whole || b.whole) return true;
  return a.const_index && b.const_index && *a.const_index == *b.const_index;
}

}  // namespace

// ---------------------------------------------------------------- context

Elaborator::Elaborator(const syntax::SourceModel& src, ElabOptions opts) : src_(src), opts_(opts) {
  base_.constants = src.constants();
  for (const auto& t : src.types) {
    Type ty = resolve_type(t.type);
    if (ty.kind == Type::Kind::Scalar) base_.sets[t.name] = ty.element;
  }
  for (const auto& p : src.predicates) {
    FlatPredicate fp;
    fp.name = p.name;
    fp.body = p.body;
    for (const auto& a : p.params) fp.params.emplace_back(a.name, resolve_domain(a.type));
    base_.predicates.push_back(std::move(fp));
  }
  for (const auto& g : src.globals) {
    FlatVar v;
    v.name = g.name;
    v.type = resolve_type(g.type);
    v.init = initial_slots(v.type, g.init, g.loc);
    v.loc = g.loc;
    globals_[g.name] = std::move(v);
  }
  single_module_ = src.instances.empty() && !src.system && src.modules.size() == 1;
}

Domain Elaborator::resolve_domain(const TypeExpr& t) const {
  Type ty = resolve_type(t);
  if (ty.kind != Type::Kind::Scalar) fail(ErrorKind::TypeError, "expected a scalar type", t.loc);
  return ty.element;
}

Type Elaborator::resolve_type(const TypeExpr& t) const {
  static thread_local std::vector<std::string> resolving;
  Type out;
  auto constant = [&](const Expr& e) {
    auto v = base_.try_const(e);
    if (!v) fail(ErrorKind::TypeError, fmt::format("'{}' is not a constant", syntax::print(e)), e.loc);
    return *v;
  };
  switch (t.kind) {
    case TypeExpr::Kind::Bool:
      out.element = Domain::boolean();
      return out;
    case TypeExpr::Kind::Range: {
      std::int64_t lo = constant(t.exprs[0]), hi = constant(t.exprs[1]);
      if (lo > hi) fail(ErrorKind::BoundError, fmt::format("empty range {}..{}", lo, hi), t.loc);
      if (hi - lo > 1'000'000) fail(ErrorKind::BoundError, "range too large", t.loc);
      out.element = Domain::range(lo, hi);
      return out;
    }
    case TypeExpr::Kind::Set: {
      bool any_symbol = false, any_int = false;
      for (const auto& e : t.exprs) {
        std::int64_t v;
        if (e.kind == ExprKind::Name && !e.primed && !base_.constants.count(e.name)) {
          v = base_.symbols.intern(e.name);
          any_symbol = true;
        } else {
          v = constant(e);
          any_int = true;
        }
        if (!out.element.contains(v)) out.element.values.push_back(v);
      }
      if (any_symbol && any_int) fail(ErrorKind::TypeError, "set mixes symbols and integers", t.loc);
      if (out.element.empty()) fail(ErrorKind::TypeError, "empty set type", t.loc);
      out.element.kind = any_symbol ? ScalarKind::Symbol : ScalarKind::Int;
      return out;
    }
    case TypeExpr::Kind::Named: {
      auto it = std::find_if(src_.types.begin(), src_.types.end(), [&](const auto& d) { return d.name == t.name; });
      if (it == src_.types.end()) fail(ErrorKind::UnknownReference, fmt::format("unknown type '{}'", t.name), t.loc);
      if (std::find(resolving.begin(), resolving.end(), t.name) != resolving.end())
        fail(ErrorKind::TypeError, fmt::format("type '{}' is defined in terms of itself", t.name), t.loc);
      resolving.push_back(t.name);
      try {
        out = resolve_type(it->type);
      } catch (...) {
        resolving.pop_back();
        throw;
      }
      resolving.pop_back();
      return out;
    }
    case TypeExpr::Kind::Union: {
      for (const auto& p : t.parts) {
        Domain d = resolve_domain(p);
        if (!out.element.empty() && d.kind != out.element.kind)
          fail(ErrorKind::TypeError, "union of incompatible sets", t.loc);
        out.element.kind = d.kind;
        for (auto v : d.values)
          if (!out.element.contains(v)) out.element.values.push_back(v);
      }
      return out;
    }
    case TypeExpr::Kind::Array:
      out.kind = Type::Kind::Array;
      out.index = resolve_domain(t.parts[0]);
      out.element = resolve_domain(t.parts[1]);
      return out;
    case TypeExpr::Kind::Queue:
      out.kind = Type::Kind::Queue;
      out.element = resolve_domain(t.parts[0]);
      out.capacity = constant(t.exprs[0]);
      if (out.capacity < 1 || out.capacity > 64)
        fail(ErrorKind::BoundError, "queue capacity must be between 1 and 64", t.loc);
      return out;
  }
  return out;
}

std::vector<std::int64_t> Elaborator::initial_slots(const Type& t, const std::optional<Expr>& init,
                                                    SourceLoc loc) const {
  auto scalar = [&](const Expr& e, const Domain& d) {
    if (has_prime(e)) fail(ErrorKind::TypeError, "primed reference in an initial value", e.loc);
    auto v = base_.try_const(e);
    if (!v) fail(ErrorKind::TypeError, fmt::format("initial value '{}' is not constant", syntax::print(e)), e.loc);
    if (!d.contains(*v))
      fail(ErrorKind::TypeError, fmt::format("initial value '{}' is outside its type", syntax::print(e)), e.loc);
    return *v;
  };
  switch (t.kind) {
    case Type::Kind::Scalar:
      return {init ? scalar(*init, t.element) : t.element.values.front()};
    case Type::Kind::Array: {
      std::vector<std::int64_t> out;
      if (init && init->kind == ExprKind::SetLit) {
        if (init->kids.size() != t.index.size())
          fail(ErrorKind::TypeError, fmt::format("array initializer needs {} elements", t.index.size()), init->loc);
        for (const auto& k : init->kids) out.push_back(scalar(k, t.element));
      } else {
        std::int64_t v = init ? scalar(*init, t.element) : t.element.values.front();
        out.assign(t.index.size(), v);
      }
      return out;
    }
    case Type::Kind::Queue: {
      std::vector<std::int64_t> out(static_cast<std::size_t>(t.capacity) + 1, 0);
      if (init) {
        if (init->kind != ExprKind::SetLit || init->kids.size() > static_cast<std::size_t>(t.capacity))
          fail(ErrorKind::TypeError, "queue initializer must list at most capacity elements", init->loc);
        out[0] = static_cast<std::int64_t>(init->kids.size());
        for (std::size_t i = 0; i < init->kids.size(); ++i) out[i + 1] = scalar(init->kids[i], t.element);
      }
      return out;
    }
  }
  (void)loc;
  return {};
}

// ---------------------------------------------------------------- instantiate

Instance Elaborator::instantiate(const InstanceDecl& decl, const std::string& prefix) const {
  const ModuleDecl* mod = src_.find_module(decl.module);
  if (!mod) fail(ErrorKind::UnknownReference, fmt::format("unknown module '{}'", decl.module), decl.loc);
  const std::string& iname = decl.name;

  Instance out;
  out.names = {iname};
  out.modules[iname] = mod->name;

  if (decl.args.size() < mod->interface.size())
    fail(ErrorKind::MissingBinding,
         fmt::format("instance '{}' binds {} of {} interface variables of '{}'; '{}' is unbound", iname,
                     decl.args.size(), mod->interface.size(), mod->name, mod->interface[decl.args.size()].name),
         decl.loc);
  if (decl.args.size() > mod->interface.size())
    fail(ErrorKind::ArityError,
         fmt::format("instance '{}' passes {} arguments but '{}' declares {} interface variables", iname,
                     decl.args.size(), mod->name, mod->interface.size()),
         decl.loc);

  SubstMap sm;
  for (std::size_t k = 0; k < mod->interface.size(); ++k) {
    const auto& slot = mod->interface[k];
    const auto& arg = decl.args[k];
    if (arg.mode != slot.mode)
      fail(ErrorKind::ModeMismatch,
           fmt::format("'{}' is declared '{}' in module '{}' but bound with '{}'", slot.name, to_string(slot.mode),
                       mod->name, to_string(arg.mode)),
           arg.loc);

    const Expr& v = arg.value;
    const Expr* base = nullptr;
    std::optional<std::int64_t> elem;
    if (v.kind == ExprKind::Name && !v.primed && !base_.constants.count(v.name) &&
        (globals_.count(v.name) || !base_.symbols.find(v.name))) {
      base = &v;
    } else if (v.kind == ExprKind::Index && v.kids[0].kind == ExprKind::Name && globals_.count(v.kids[0].name)) {
      base = &v.kids[0];
      elem = base_.try_const(v.kids[1]);
      if (!elem)
        fail(ErrorKind::TypeError, fmt::format("element selector '{}' must be constant", syntax::print(v.kids[1])),
             v.loc);
    }

    if (base) {
      auto git = globals_.find(base->name);
      if (git == globals_.end()) {
        // Undeclared globals take the type and initial value of the first slot bound to them.
        FlatVar g;
        g.name = base->name;
        g.type = resolve_type(slot.type);
        g.init = initial_slots(g.type, slot.init, slot.loc);
        g.loc = arg.loc;
        git = globals_.emplace(g.name, std::move(g)).first;
      }
      Expr repl = Expr::ident(base->name, arg.loc);
      if (elem) {
        const Type& gt = git->second.type;
        if (gt.kind != Type::Kind::Array || !gt.index.contains(*elem))
          fail(ErrorKind::TypeError, fmt::format("'{}' is not an element of an array variable", syntax::print(v)),
               v.loc);
        Expr idx = gt.index.kind == ScalarKind::Symbol ? Expr::ident(base_.symbols.name(*elem), arg.loc)
                                                       : Expr::integer(*elem, arg.loc);
        repl = Expr::index(std::move(repl), std::move(idx), arg.loc);
      }
      out.uses.push_back(VarUse{base->name, elem, slot.mode, arg.loc});
      sm[slot.name] = std::move(repl);
    } else {
      if (slot.mode != Mode::In)
        fail(ErrorKind::ModeMismatch,
             fmt::format("'{}' slot '{}' must be bound to a global variable, not '{}'", to_string(slot.mode),
                         slot.name, syntax::print(v)),
             arg.loc);
      if (!base_.try_const(v))
        fail(ErrorKind::TypeError,
             fmt::format("argument '{}' is neither a global variable nor a constant", syntax::print(v)), arg.loc);
      sm[slot.name] = v;
    }
  }

  for (const auto& l : mod->locals) {
    FlatVar fv;
    fv.name = prefix + l.name;
    fv.type = resolve_type(l.type);
    fv.init = initial_slots(fv.type, l.init, l.loc);
    fv.local = true;
    fv.loc = l.loc;
    out.locals.push_back(std::move(fv));
    sm[l.name] = Expr::ident(prefix + l.name, l.loc);
  }
  for (const auto& t : mod->timers) {
    auto b = base_.try_const(t.bound);
    if (!b || *b < 0) fail(ErrorKind::BoundError, fmt::format("timer '{}' needs a constant bound >= 0", t.name), t.loc);
    out.timers.push_back(FlatTimer{prefix + t.name, *b, 0});
    sm[t.name] = Expr::ident(prefix + t.name, t.loc);
  }

  auto& deps = out.deps[iname];
  for (const auto& w : decl.with) {
    auto it = std::find_if(mod->depends.begin(), mod->depends.end(), [&](const auto& d) { return d.slot == w.slot; });
    if (it == mod->depends.end())
      fail(ErrorKind::UnknownDependency, fmt::format("module '{}' has no dependency slot '{}'", mod->name, w.slot),
           w.loc);
    const InstanceDecl* target = src_.find_instance(w.instance);
    if (!target)
      fail(ErrorKind::UnknownDependency, fmt::format("dependency '{}' names unknown instance '{}'", w.slot, w.instance),
           w.loc);
    if (target->module != it->module)
      fail(ErrorKind::UnknownDependency,
           fmt::format("dependency '{}' expects a '{}' instance but '{}' is a '{}'", w.slot, it->module, w.instance,
                       target->module),
           w.loc);
    if (!deps.emplace(w.slot, w.instance).second)
      fail(ErrorKind::DuplicateName, fmt::format("dependency slot '{}' bound twice", w.slot), w.loc);
  }
  for (const auto& d : mod->depends)
    if (!deps.count(d.slot))
      fail(ErrorKind::MissingBinding,
           fmt::format("instance '{}' does not bind dependency slot '{}' of module '{}'", iname, d.slot, mod->name),
           decl.loc);

  std::set<std::string> read_only;
  for (const auto& s : mod->interface)
    if (s.mode == Mode::In) read_only.insert(s.name);
  std::function<void(const std::vector<Stmt>&, const std::string&)> check_writes =
      [&](const std::vector<Stmt>& body, const std::string& ev) {
        for (const auto& s : body) {
          if ((s.kind == StmtKind::Assign || s.kind == StmtKind::Demonic) && read_only.count(target_base(s.target)))
            fail(ErrorKind::ModeMismatch,
                 fmt::format("event '{}' writes '{}', which is an 'in' variable of module '{}'", ev,
                             target_base(s.target), mod->name),
                 s.loc);
          for (const auto& b : s.branches) check_writes(b, ev);
        }
      };

  for (const auto& ev : mod->events) {
    check_writes(ev.action, ev.name);
    InstanceEvent ie;
    ie.instance = iname;
    ie.decl = ev;
    ie.decl.name = prefix + ev.name;
    ie.decl.guard = subst(ev.guard, sm);
    for (auto& s : ie.decl.action) s = subst(s, sm);
    for (auto& t : ie.decl.start) t = prefix + t;
    for (auto& t : ie.decl.stop) t = prefix + t;
    if (ev.sync) {
      for (const auto& q : ev.sync->targets) {
        auto it = deps.find(q.instance);
        if (it == deps.end())
          fail(ErrorKind::UnknownDependency, fmt::format("'{}' is not a dependency slot", q.instance), q.loc);
        ie.sync_targets.push_back(it->second + "." + q.event);
      }
    }
    out.events.push_back(std::move(ie));
  }
  return out;
}

// ---------------------------------------------------------------- compose

Instance Elaborator::compose(Instance a, Instance b) const {
  for (const auto& n : b.names)
    if (std::find(a.names.begin(), a.names.end(), n) != a.names.end())
      fail(ErrorKind::NameCollision, fmt::format("instance '{}' appears twice in the composition", n));

  for (const auto& ub : b.uses) {
    for (const auto& ua : a.uses) {
      if (ua.var != ub.var) continue;
      bool overlap = !ua.element || !ub.element || *ua.element == *ub.element;
      if (overlap && !combine_modes(ua.mode, ub.mode))
        fail(ErrorKind::ModeConflict,
             fmt::format("'{}' is bound as 'out' by two instances; only one writer is allowed", ub.var), ub.loc);
    }
  }

  std::set<std::string> names;
  for (const auto& v : a.locals) names.insert(v.name);
  for (const auto& t : a.timers) names.insert(t.name);
  for (const auto& e : a.events) names.insert(e.decl.name);
  auto claim = [&](const std::string& n) {
    if (!names.insert(n).second) fail(ErrorKind::NameCollision, fmt::format("name '{}' defined twice after prefixing", n));
  };
  for (const auto& v : b.locals) claim(v.name);
  for (const auto& t : b.timers) claim(t.name);
  for (const auto& e : b.events) claim(e.decl.name);

  a.names.insert(a.names.end(), b.names.begin(), b.names.end());
  a.modules.insert(b.modules.begin(), b.modules.end());
  a.deps.insert(b.deps.begin(), b.deps.end());
  a.uses.insert(a.uses.end(), b.uses.begin(), b.uses.end());
  a.locals.insert(a.locals.end(), std::make_move_iterator(b.locals.begin()), std::make_move_iterator(b.locals.end()));
  a.timers.insert(a.timers.end(), b.timers.begin(), b.timers.end());
  a.events.insert(a.events.end(), std::make_move_iterator(b.events.begin()), std::make_move_iterator(b.events.end()));
  return a;
}

Instance Elaborator::iterated_compose(const std::string& var, const TypeExpr& set, const InstanceDecl& templ) const {
  Domain d = resolve_domain(set);
  if (d.empty()) fail(ErrorKind::EmptyIteration, fmt::format("iteration over '{}' is empty", var), set.loc);
  std::optional<Instance> acc;
  for (auto v : d.values) {
    Expr value = d.kind == ScalarKind::Symbol ? Expr::ident(base_.symbols.name(v))
                 : d.kind == ScalarKind::Bool ? Expr::boolean(v != 0)
                                              : Expr::integer(v);
    InstanceDecl decl = templ;
    SubstMap sm{{var, value}};
    for (auto& a : decl.args) a.value = subst(a.value, sm);
    decl.name = fmt::format("{}_{}", templ.module, base_.render(d, v));
    Instance inst = instantiate(decl, decl.name + ".");
    acc = acc ? compose(std::move(*acc), std::move(inst)) : std::move(inst);
  }
  return std::move(*acc);
}

Instance Elaborator::compose_system() const {
  if (single_module_) {
    const ModuleDecl& mod = src_.modules.front();
    InstanceDecl decl;
    decl.name = mod.name;
    decl.module = mod.name;
    decl.loc = mod.loc;
    for (const auto& s : mod.interface) decl.args.push_back(syntax::Argument{s.mode, Expr::ident(s.name, s.loc), s.loc});
    return instantiate(decl, "");
  }

  std::function<Instance(const CompositionExpr&)> eval = [&](const CompositionExpr& c) -> Instance {
    switch (c.kind) {
      case CompositionExpr::Kind::Ref: {
        if (const InstanceDecl* d = src_.find_instance(c.name)) return instantiate(*d, d->name + ".");
        if (const syntax::GroupDecl* g = src_.find_group(c.name)) {
          std::optional<Instance> acc;
          for (const auto& m : g->members) {
            CompositionExpr ref;
            ref.name = m;
            ref.loc = g->loc;
            Instance i = eval(ref);
            acc = acc ? compose(std::move(*acc), std::move(i)) : std::move(i);
          }
          return std::move(*acc);
        }
        fail(ErrorKind::UnknownReference, fmt::format("unknown instance '{}'", c.name), c.loc);
      }
      case CompositionExpr::Kind::Parallel: {
        Instance acc = eval(c.parts.front());
        for (std::size_t i = 1; i < c.parts.size(); ++i) acc = compose(std::move(acc), eval(c.parts[i]));
        return acc;
      }
      case CompositionExpr::Kind::Iterated:
        return iterated_compose(c.name, *c.set, *c.parts.front().inline_instance);
      case CompositionExpr::Kind::Inline: {
        InstanceDecl d = *c.inline_instance;
        d.name = d.module;
        return instantiate(d, d.name + ".");
      }
    }
    fail(ErrorKind::SyntaxError, "malformed composition", c.loc);
  };

  if (src_.system) return eval(*src_.system);
  if (src_.instances.empty())
    fail(ErrorKind::MissingBinding, "the model declares several modules but no instances or system");
  std::optional<Instance> acc;
  for (const auto& d : src_.instances) {
    Instance i = instantiate(d, d.name + ".");
    acc = acc ? compose(std::move(*acc), std::move(i)) : std::move(i);
  }
  return std::move(*acc);
}

// ---------------------------------------------------------------- graphs

void Elaborator::build_dependency_graphs(const Instance& sys, FlatModel& out) const {
  // Module dependency graph.
  Graph mg;
  std::map<std::string, int> mid;
  for (const auto& m : src_.modules) {
    mid[m.name] = static_cast<int>(mg.nodes.size());
    mg.nodes.push_back(m.name);
  }
  std::vector<std::vector<int>> madj(mg.nodes.size());
  std::map<std::pair<int, int>, SourceLoc> mloc;
  for (const auto& m : src_.modules) {
    for (const auto& d : m.depends) {
      auto it = mid.find(d.module);
      if (it == mid.end()) fail(ErrorKind::UnknownReference, fmt::format("unknown module '{}'", d.module), d.loc);
      mg.edges.emplace_back(m.name, d.module);
      madj[mid[m.name]].push_back(it->second);
      mloc.emplace(std::make_pair(mid[m.name], it->second), d.loc);
    }
  }
  if (auto cyc = find_cycle(madj); !cyc.empty()) {
    std::vector<std::string> names;
    for (int v : cyc) names.push_back(mg.nodes[v]);
    names.push_back(mg.nodes[cyc.front()]);
    SourceLoc loc = mloc[{cyc[0], cyc.size() > 1 ? cyc[1] : cyc[0]}];
    fail(ErrorKind::CyclicModuleDependency, fmt::format("cyclic module dependency: {}", join(names, " -> ")), loc);
  }

  // Event dependency graph over module-qualified events.
  Graph eg;
  std::map<std::string, int> eid;
  for (const auto& m : src_.modules)
    for (const auto& e : m.events) {
      std::string n = m.name + "." + e.name;
      eid[n] = static_cast<int>(eg.nodes.size());
      eg.nodes.push_back(n);
    }
  std::vector<std::vector<int>> eadj(eg.nodes.size());
  std::map<std::pair<int, int>, SourceLoc> eloc;
  for (const auto& m : src_.modules) {
    for (const auto& e : m.events) {
      if (!e.sync) continue;
      for (const auto& q : e.sync->targets) {
        auto dit = std::find_if(m.depends.begin(), m.depends.end(), [&](const auto& d) { return d.slot == q.instance; });
        if (dit == m.depends.end())
          fail(ErrorKind::SyncTargetNotFound,
               fmt::format("sync target '{}.{}': '{}' is not a dependency of module '{}'", q.instance, q.event,
                           q.instance, m.name),
               q.loc);
        const ModuleDecl* tm = src_.find_module(dit->module);
        if (!tm || !tm->find_event(q.event))
          fail(ErrorKind::SyncTargetNotFound,
               fmt::format("sync target '{}.{}': module '{}' has no event '{}'", q.instance, q.event, dit->module,
                           q.event),
               q.loc);
        std::string from = m.name + "." + e.name, to = tm->name + "." + q.event;
        eg.edges.emplace_back(from, to);
        eadj[eid[from]].push_back(eid[to]);
        eloc.emplace(std::make_pair(eid[from], eid[to]), q.loc);
      }
    }
  }
  if (auto cyc = find_cycle(eadj); !cyc.empty()) {
    std::vector<std::string> names;
    for (int v : cyc) names.push_back(eg.nodes[v]);
    names.push_back(eg.nodes[cyc.front()]);
    SourceLoc loc = eloc[{cyc[0], cyc.size() > 1 ? cyc[1] : cyc[0]}];
    fail(ErrorKind::CyclicEventDependency, fmt::format("cyclic event dependency: {}", join(names, " -> ")), loc);
  }
  out.module_graph = std::move(mg);
  out.event_graph = eg;

  // Instance-level event graph; its weakly connected components are the sync sets.
  for (const auto& [inst, slots] : sys.deps)
    for (const auto& [slot, target] : slots)
      if (std::find(sys.names.begin(), sys.names.end(), target) == sys.names.end())
        fail(ErrorKind::UnknownDependency,
             fmt::format("instance '{}' depends on '{}', which is not part of the system", inst, target));

  std::map<std::string, int> iid;
  for (std::size_t i = 0; i < sys.events.size(); ++i) iid[sys.events[i].decl.name] = static_cast<int>(i);
  int n = static_cast<int>(sys.events.size());
  std::vector<std::vector<int>> adj(n);
  std::vector<int> indeg(n, 0), comp(n);
  for (int i = 0; i < n; ++i) comp[i] = i;
  std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
  for (int i = 0; i < n; ++i) {
    for (const auto& t : sys.events[i].sync_targets) {
      auto it = iid.find(t);
      if (it == iid.end())
        fail(ErrorKind::SyncTargetNotFound, fmt::format("sync target '{}' does not exist", t),
             sys.events[i].decl.sync->loc);
      adj[i].push_back(it->second);
      ++indeg[it->second];
      comp[find(i)] = find(it->second);
    }
  }
  if (auto cyc = find_cycle(adj); !cyc.empty())
    fail(ErrorKind::CyclicEventDependency,
         fmt::format("cyclic event dependency through '{}'", sys.events[cyc.front()].decl.name),
         sys.events[cyc.front()].decl.loc);

  std::map<int, std::vector<int>> components;
  for (int i = 0; i < n; ++i) components[find(i)].push_back(i);
  std::vector<SyncSet> sets;
  for (const auto& [root_id, members] : components) {
    if (members.size() < 2) continue;
    std::vector<int> roots;
    for (int m : members)
      if (indeg[m] == 0) roots.push_back(m);
    if (roots.size() != 1) {
      std::vector<std::string> rn;
      for (int r : roots) rn.push_back(sys.events[r].decl.name);
      fail(ErrorKind::AmbiguousSync,
           fmt::format("synchronized events have {} roots ({}); exactly one event must name the others",
                       roots.size(), join(rn, ", ")),
           sys.events[roots.empty() ? members.front() : roots[1]].decl.loc);
    }
    int root = roots.front();
    SyncSet s;
    std::vector<char> seen(n, 0);
    std::queue<int> bfs;
    bfs.push(root);
    seen[root] = 1;
    std::set<std::string> member_instances;
    while (!bfs.empty()) {
      int v = bfs.front();
      bfs.pop();
      s.members.push_back(sys.events[v].decl.name);
      member_instances.insert(sys.events[v].instance);
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          bfs.push(w);
        }
    }
    const auto& rootev = sys.events[root];
    std::string as = rootev.decl.sync->compound_name;
    s.compound_name = rootev.instance + "." + as;
    for (const auto& g : src_.groups) {
      std::set<std::string> expanded;
      std::function<void(const std::string&)> expand = [&](const std::string& name) {
        if (const auto* sub = src_.find_group(name)) {
          for (const auto& m : sub->members) expand(m);
        } else {
          expanded.insert(name);
        }
      };
      expand(g.name);
      if (std::includes(expanded.begin(), expanded.end(), member_instances.begin(), member_instances.end())) {
        s.compound_name = g.name + "." + as;
        break;
      }
    }
    // Module component of the root's module (undirected reachability).
    const std::string& rm = sys.modules.at(rootev.instance);
    std::set<std::string> compmods{rm};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [a, b] : out.module_graph.edges)
        if (compmods.count(a) != compmods.count(b)) {
          compmods.insert(a);
          compmods.insert(b);
          grew = true;
        }
    }
    s.module_component.assign(compmods.begin(), compmods.end());
    sets.push_back(std::move(s));
  }
  std::sort(sets.begin(), sets.end(), [](const SyncSet& a, const SyncSet& b) { return a.compound_name < b.compound_name; });
  out.sync_sets = std::move(sets);
}

// ---------------------------------------------------------------- events

FlatEvent Elaborator::merge(const std::string& id, const std::vector<Member>& members, bool prefix_indices) const {
  FlatEvent fe;
  fe.id = id;
  fe.loc = members.front().decl->loc;
  const bool compound = members.size() > 1;
  std::optional<std::int64_t> u;
  std::vector<std::vector<WriteInfo>> member_writes;

  for (const auto& m : members) {
    const EventDecl& d = *m.decl;
    fe.members.push_back(d.name);
    SubstMap idx;
    auto add_indices = [&](const std::vector<syntax::IndexDecl>& in, std::vector<FlatIndex>& outv) {
      for (const auto& x : in) {
        std::string name = prefix_indices ? m.instance + "." + x.name : x.name;
        if (prefix_indices) idx[x.name] = Expr::ident(name, x.loc);
        outv.push_back(FlatIndex{name, resolve_domain(x.set)});
      }
    };
    add_indices(d.fair_indices, fe.f_ind);
    add_indices(d.demonic_indices, fe.d_ind);

    if (has_prime(d.guard))
      fail(ErrorKind::TypeError,
           fmt::format("guard of '{}' reads a next-state value; primed variables are only supported in actions", d.name),
           d.guard.loc);
    fe.guard = conj(std::move(fe.guard), subst(d.guard, idx));

    auto lo = base_.try_const(d.lower);
    if (!lo || *lo < 0) fail(ErrorKind::BoundError, fmt::format("lower bound of '{}' must be a constant >= 0", d.name), d.loc);
    fe.l = std::max(fe.l, *lo);
    if (d.upper) {
      auto hi = base_.try_const(*d.upper);
      if (!hi || *hi < 0) fail(ErrorKind::BoundError, fmt::format("upper bound of '{}' must be a constant >= 0", d.name), d.loc);
      u = u ? std::min(*u, *hi) : *hi;
    }
    fe.fair = std::max(fe.fair, d.fairness);
    for (const auto& t : d.start)
      if (std::find(fe.start.begin(), fe.start.end(), t) == fe.start.end()) fe.start.push_back(t);
    for (const auto& t : d.stop)
      if (std::find(fe.stop.begin(), fe.stop.end(), t) == fe.stop.end()) fe.stop.push_back(t);

    std::vector<Stmt> body;
    for (const auto& s : d.action) body.push_back(subst(s, idx));

    std::function<std::vector<WriteInfo>(const std::vector<Stmt>&, const Expr&)> collect =
        [&](const std::vector<Stmt>& seq, const Expr& cond) {
          std::vector<WriteInfo> all;
          for (const auto& s : seq) {
            std::vector<WriteInfo> w;
            if (s.kind == StmtKind::Assign || s.kind == StmtKind::Demonic) {
              WriteInfo wi;
              wi.var = target_base(s.target);
              wi.gw.condition = cond;
              wi.gw.demonic = s.kind == StmtKind::Demonic;
              wi.gw.value = s.value;
              wi.gw.loc = s.loc;
              if (s.target.kind == ExprKind::Index) {
                if (s.target.kids[0].kind != ExprKind::Name)
                  fail(ErrorKind::TypeError, "only one level of array indexing can be assigned", s.loc);
                wi.whole = false;
                wi.gw.index = s.target.kids[1];
                wi.const_index = base_.try_const(s.target.kids[1]);
              }
              w.push_back(std::move(wi));
            } else if (s.kind == StmtKind::If) {
              Expr negated = Expr::boolean(true);
              for (std::size_t i = 0; i < s.branches.size(); ++i) {
                Expr arm = i < s.conditions.size() ? conj(negated, s.conditions[i]) : negated;
                auto sub = collect(s.branches[i], conj(cond, arm));
                w.insert(w.end(), sub.begin(), sub.end());
                if (i < s.conditions.size())
                  negated = conj(std::move(negated), Expr::unary(Op::Not, s.conditions[i], s.conditions[i].loc));
              }
            }
            for (const auto& a : all)
              for (const auto& b : w)
                if (overlaps(a, b))
                  fail(ErrorKind::DoubleAssignment,
                       fmt::format("event '{}' assigns '{}' more than once", d.name,
                                   b.whole ? b.var : fmt::format("{}[{}]", b.var, syntax::print(*b.gw.index))),
                       b.gw.loc);
            all.insert(all.end(), w.begin(), w.end());
          }
          return all;
        };
    auto writes = collect(body, Expr::boolean(true));
    for (const auto& prev : member_writes)
      for (const auto& a : prev)
        for (const auto& b : writes)
          if (overlaps(a, b))
            fail(ErrorKind::DoubleAssignment,
                 fmt::format("synchronized events assign '{}' more than once ('{}' and another member of '{}')",
                             b.whole ? b.var : fmt::format("{}[{}]", b.var, syntax::print(*b.gw.index)), d.name, id),
                 b.gw.loc);
    member_writes.push_back(std::move(writes));
  }
  fe.u = u;
  if (u && fe.l > *u)
    fail(ErrorKind::MergedBoundEmpty,
         fmt::format("merged time bounds of '{}' are empty: [{}, {}]", id, fe.l, *u), fe.loc);
  if (!compound && u && fe.fair != Fairness::Spontaneous)
    fail(ErrorKind::BoundError, fmt::format("event '{}' combines a fairness keyword with a finite upper bound", id),
         fe.loc);

  // Projections in first-appearance order, then topologically sorted.
  std::vector<std::string> order;
  std::map<std::string, int> pos;
  std::map<std::string, Projection> projs;
  for (const auto& mw : member_writes)
    for (const auto& w : mw) {
      if (!pos.count(w.var)) {
        pos[w.var] = static_cast<int>(order.size());
        order.push_back(w.var);
        projs[w.var].var = w.var;
      }
      projs[w.var].writes.push_back(w.gw);
    }

  int nv = static_cast<int>(order.size());
  std::vector<std::set<int>> succ(nv), strict(nv);
  std::map<int, SourceLoc> vloc;
  for (const auto& [var, p] : projs) {
    int v = pos[var];
    for (const auto& w : p.writes) {
      vloc.emplace(v, w.loc);
      auto visit = [&](const Expr& n) {
        auto it = pos.find(n.name);
        if (it == pos.end()) return;
        if (n.primed) {
          if (it->second == v)
            fail(ErrorKind::CircularDataFlow,
                 fmt::format("the new value of '{}' in '{}' depends on '{}''", var, id, var), w.loc);
          succ[it->second].insert(v);
        } else if (opts_.strict_action_edges && it->second != v) {
          strict[it->second].insert(v);
        }
      };
      for_each_name(w.value, visit);
      for_each_name(w.condition, visit);
      if (w.index) for_each_name(*w.index, visit);
    }
  }
  auto check_cycles = [&](const std::vector<std::set<int>>& g) {
    std::vector<std::vector<int>> adj(nv);
    for (int i = 0; i < nv; ++i) adj[i].assign(g[i].begin(), g[i].end());
    if (auto cyc = find_cycle(adj); !cyc.empty()) {
      std::vector<std::string> names;
      for (int c : cyc) names.push_back(order[c] + "'");
      names.push_back(order[cyc.front()] + "'");
      fail(ErrorKind::CircularDataFlow,
           fmt::format("circular data flow in '{}': {}", id, join(names, " -> ")), vloc[cyc.front()]);
    }
  };
  check_cycles(succ);
  if (opts_.strict_action_edges) {
    std::vector<std::set<int>> both = succ;
    for (int i = 0; i < nv; ++i) both[i].insert(strict[i].begin(), strict[i].end());
    check_cycles(both);
  }

  std::vector<int> indeg(nv, 0);
  for (int i = 0; i < nv; ++i)
    for (int j : succ[i]) ++indeg[j];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < nv; ++i)
    if (!indeg[i]) ready.push(i);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    fe.action.push_back(std::move(projs[order[v]]));
    for (int w : succ[v])
      if (--indeg[w] == 0) ready.push(w);
  }
  for (int i = 0; i < nv; ++i)
    for (int j : succ[i]) fe.action_edges.emplace_back(order[i], order[j]);
  std::sort(fe.action_edges.begin(), fe.action_edges.end());
  return fe;
}

FlatEvent Elaborator::resolve_sync(const SyncSet& set, const Instance& sys) const {
  std::vector<Member> members;
  for (const auto& name : set.members) {
    auto it = std::find_if(sys.events.begin(), sys.events.end(), [&](const auto& e) { return e.decl.name == name; });
    if (it == sys.events.end()) fail(ErrorKind::SyncTargetNotFound, fmt::format("sync member '{}' not found", name));
    members.push_back(Member{it->instance, &it->decl});
  }
  return merge(set.compound_name, members, true);
}

FlatEvent Elaborator::flatten_event(const InstanceEvent& ev) const {
  return merge(ev.decl.name, {Member{ev.instance, &ev.decl}}, false);
}

FlatModel Elaborator::flatten() const {
  Instance sys = compose_system();
  FlatModel m;
  m.constants = base_.constants;
  m.sets = base_.sets;
  m.predicates = base_.predicates;
  build_dependency_graphs(sys, m);

  std::set<std::string> synced;
  for (const auto& s : m.sync_sets) {
    synced.insert(s.members.begin(), s.members.end());
    m.events.push_back(resolve_sync(s, sys));
  }
  for (const auto& ie : sys.events)
    if (!synced.count(ie.decl.name)) m.events.push_back(flatten_event(ie));

  for (const auto& [name, g] : globals_) {
    FlatVar v = g;
    std::optional<Mode> mode;
    for (const auto& u : sys.uses)
      if (u.var == name) mode = mode ? combine_modes(*mode, u.mode).value_or(Mode::Out) : u.mode;
    v.mode = mode.value_or(Mode::Share);
    m.vars.push_back(std::move(v));
  }
  for (auto& l : sys.locals) m.vars.push_back(std::move(l));
  m.timers = sys.timers;
  m.symbols = base_.symbols;

  std::sort(m.vars.begin(), m.vars.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  std::sort(m.timers.begin(), m.timers.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  std::sort(m.events.begin(), m.events.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::set<std::string> names;
  for (const auto& v : m.vars)
    if (!names.insert(v.name).second) fail(ErrorKind::NameCollision, fmt::format("variable '{}' defined twice", v.name), v.loc);
  for (const auto& t : m.timers)
    if (!names.insert(t.name).second) fail(ErrorKind::NameCollision, fmt::format("timer '{}' clashes with another name", t.name));
  for (const auto& e : m.events)
    if (!names.insert(e.id).second) fail(ErrorKind::NameCollision, fmt::format("event '{}' clashes with another name", e.id), e.loc);
  for (const auto& [name, _] : m.sets)
    if (m.find_var(name) || m.find_timer(name))
      fail(ErrorKind::NameCollision, fmt::format("'{}' names both a type and a variable or timer", name));
  return m;
}

FlatModel flatten(const syntax::SourceModel& src, ElabOptions opts) { return Elaborator(src, opts).flatten(); }

}  // namespace ttm::elab
