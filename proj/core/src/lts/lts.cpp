#include "ttm/lts/lts.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "ttm/hash.hpp"
#include "ttm/syntax/printer.hpp"

namespace ttm::lts {

using elab::FlatModel;
using elab::Type;
using syntax::Expr;
using syntax::ExprKind;

namespace {

constexpr std::int64_t kInfinity = -1;

/// Whole-value expression for array and queue assignments.
struct Agg {
  enum class Kind : std::uint8_t { Var, List, Enqueue, Dequeue } kind = Kind::Var;
  int offset = 0;
  bool primed = false;
  std::vector<int> nodes;  // List elements, or the Enqueue argument
  int child = -1;
  SourceLoc loc;
};

struct CWrite {
  int cond = -1;
  int index = -1;  // element index node
  bool demonic = false;
  int value = -1;  // scalar value node
  int agg = -1;    // whole-value expression
  int dom = -1;    // demonic domain lookup
  int lo = -1, hi = -1;  // demonic runtime range
  bool whole_array_demonic = false;
  SourceLoc loc;
};

struct CProj {
  int var = 0;
  int offset = 0;
  int slots = 1;
  Type::Kind kind = Type::Kind::Scalar;
  int elem = -1;   // element domain lookup
  int index = -1;  // array index domain lookup
  int capacity = 0;
  std::string name;
  std::vector<CWrite> writes;
};

struct CEvent {
  int first_slot = 0;
  std::vector<int> fair_env, dem_env;
  std::vector<std::vector<std::int64_t>> fair_vals, dem_vals;
  int guard = -1;
  bool timed_guard = false;
  std::int64_t l = 0, u = kInfinity;
  std::vector<int> start, stop;  // timer indices
  std::vector<CProj> action;
};

template <typename F>
void cartesian(const std::vector<elab::Domain>& doms, F&& f) {
  std::vector<std::int64_t> cur(doms.size());
  std::vector<std::size_t> idx(doms.size(), 0);
  for (const auto& d : doms)
    if (d.empty()) return;
  while (true) {
    for (std::size_t i = 0; i < doms.size(); ++i) cur[i] = doms[i].values[idx[i]];
    f(cur);
    std::size_t k = doms.size();
    while (k > 0) {
      --k;
      if (++idx[k] < doms[k].size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (doms.empty()) return;
  }
}

bool mentions_timer(const Expr& e, const FlatModel& m) {
  if (e.kind == ExprKind::Name && m.find_timer(e.name)) return true;
  if (e.kind == ExprKind::Call)
    if (const auto* p = m.find_predicate(e.name); p && mentions_timer(p->body, m)) return true;
  for (const auto& k : e.kids)
    if (mentions_timer(k, m)) return true;
  return false;
}

}  // namespace

class Compiled {
 public:
  const FlatModel& m;
  Code code;
  int width = 0, timer_base = 0, mono_base = 0, clock_base = 0, x_off = 0, p_off = 0;
  std::vector<int> var_off;
  std::vector<ClockSlot> slots;
  std::vector<CEvent> events;
  std::vector<Agg> aggs;
  std::vector<int> var_elem;  // element lookup per var

  explicit Compiled(const FlatModel& model) : m(model) {}

  std::int64_t* env() const {
    thread_local std::vector<std::int64_t> buf;
    if (buf.size() < static_cast<std::size_t>(code.env_size()) + 1) buf.resize(static_cast<std::size_t>(code.env_size()) + 1);
    return buf.data();
  }

  Binding bind(const std::string& name) const {
    Binding b;
    if (const auto* v = m.find_var(name)) {
      int i = static_cast<int>(v - m.vars.data());
      b.offset = var_off[static_cast<std::size_t>(i)];
      b.element = var_elem[static_cast<std::size_t>(i)];
      switch (v->type.kind) {
        case Type::Kind::Scalar: b.kind = Binding::Kind::Scalar; break;
        case Type::Kind::Array:
          b.kind = Binding::Kind::Array;
          b.lookup = array_lookup.at(i);
          break;
        case Type::Kind::Queue:
          b.kind = Binding::Kind::Queue;
          b.capacity = static_cast<int>(v->type.capacity);
          break;
      }
      return b;
    }
    if (const auto* t = m.find_timer(name)) {
      b.kind = Binding::Kind::Scalar;
      b.offset = timer_base + static_cast<int>(t - m.timers.data());
    }
    return b;
  }
  std::map<int, int> array_lookup;

  void set_fair(const CEvent& e, int fair, std::int64_t* env) const {
    const auto& fv = e.fair_vals[static_cast<std::size_t>(fair)];
    for (std::size_t i = 0; i < fv.size(); ++i) env[e.fair_env[i]] = fv[i];
  }
  void set_dem(const CEvent& e, int dem, std::int64_t* env) const {
    const auto& dv = e.dem_vals[static_cast<std::size_t>(dem)];
    for (std::size_t i = 0; i < dv.size(); ++i) env[e.dem_env[i]] = dv[i];
  }

  bool guard(const Value* s, int slot) const {
    const ClockSlot& cs = slots[static_cast<std::size_t>(slot)];
    const CEvent& e = events[static_cast<std::size_t>(cs.event)];
    std::int64_t* env = this->env();
    set_fair(e, cs.fair, env);
    Frame f{s, nullptr, env};
    for (std::size_t d = 0; d < e.dem_vals.size(); ++d) {
      set_dem(e, static_cast<int>(d), env);
      if (code.truth(e.guard, f)) return true;
    }
    return false;
  }

  bool guard_with(const Value* s, int slot, int dem) const {
    const ClockSlot& cs = slots[static_cast<std::size_t>(slot)];
    const CEvent& e = events[static_cast<std::size_t>(cs.event)];
    std::int64_t* env = this->env();
    set_fair(e, cs.fair, env);
    set_dem(e, dem, env);
    return code.truth(e.guard, Frame{s, nullptr, env});
  }

  bool en(const Value* c, int slot) const {
    const CEvent& e = events[static_cast<std::size_t>(slots[static_cast<std::size_t>(slot)].event)];
    Value clk = c[clock_base + slot];
    return clk != -1 && clk >= e.l && (e.u == kInfinity || clk <= e.u);
  }

  bool tick_allowed(const Value* c) const {
    if (c[x_off] != -1) return false;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const CEvent& e = events[static_cast<std::size_t>(slots[s].event)];
      if (e.u != kInfinity && c[clock_base + static_cast<int>(s)] >= e.u) return false;
    }
    return true;
  }

  void hash_step(const Value* c, int slot, Value* out) const {
    std::copy(c, c + width, out);
    const CEvent& e = events[static_cast<std::size_t>(slots[static_cast<std::size_t>(slot)].event)];
    out[x_off] = slot;
    out[p_off] = 2 * slot;
    out[p_off + 1] = 0;
    for (int t : e.start) out[mono_base + t] = 0;
    for (int t : e.stop) out[mono_base + t] = 0;
  }

  void tick_step(const Value* c, Value* out) const {
    std::copy(c, c + width, out);
    for (std::size_t t = 0; t < m.timers.size(); ++t) {
      int ti = static_cast<int>(t);
      if (!out[mono_base + ti]) continue;
      Value cap = static_cast<Value>(m.timers[t].bound + 1);
      if (out[timer_base + ti] < cap) ++out[timer_base + ti];
    }
    for (std::size_t s = 0; s < slots.size(); ++s) {
      int si = static_cast<int>(s);
      const CEvent& e = events[static_cast<std::size_t>(slots[s].event)];
      Value before = c[clock_base + si];
      bool now = e.timed_guard ? guard(out, si) : before != -1;
      Value& clk = out[clock_base + si];
      if (!now) clk = -1;
      else if (before == -1) clk = 0;
      else if (e.u == kInfinity) clk = static_cast<Value>(std::min<std::int64_t>(before + 1, e.l));
      else clk = before + 1;
    }
    out[p_off] = -2;
    out[p_off + 1] = 0;
  }

  void finish_event(const Value* pre, int slot, int dem, Value* post) const {
    const CEvent& e = events[static_cast<std::size_t>(slots[static_cast<std::size_t>(slot)].event)];
    for (int t : e.start) {
      post[timer_base + t] = 0;
      post[mono_base + t] = 1;
    }
    post[x_off] = -1;
    post[p_off] = 2 * slot + 1;
    post[p_off + 1] = dem;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      int si = static_cast<int>(s);
      Value before = pre[clock_base + si];
      bool now = guard(post, si);
      Value& clk = post[clock_base + si];
      if (!now) clk = -1;
      else if (si == slot || before == -1) clk = 0;
    }
  }

  void eval_agg(int id, const Frame& f, std::vector<std::int64_t>& out, const CProj& p) const {
    const Agg& a = aggs[static_cast<std::size_t>(id)];
    switch (a.kind) {
      case Agg::Kind::Var: {
        const Value* src = (a.primed ? f.post : f.pre) + a.offset;
        out.assign(src, src + p.slots);
        return;
      }
      case Agg::Kind::List:
        out.clear();
        for (int n : a.nodes) out.push_back(code.eval(n, f));
        return;
      case Agg::Kind::Enqueue: {
        eval_agg(a.child, f, out, p);
        if (out[0] >= p.capacity) eval_error(fmt::format("Enqueue() on the full queue '{}'", p.name), a.loc);
        out[static_cast<std::size_t>(out[0]) + 1] = code.eval(a.nodes[0], f);
        ++out[0];
        return;
      }
      case Agg::Kind::Dequeue: {
        eval_agg(a.child, f, out, p);
        if (out[0] == 0) eval_error(fmt::format("Dequeue() on the empty queue '{}'", p.name), a.loc);
        for (std::int64_t i = 1; i < out[0]; ++i) out[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i) + 1];
        out[static_cast<std::size_t>(out[0])] = 0;
        --out[0];
        return;
      }
    }
  }

  void store(const CProj& p, int pos, std::int64_t v, Value* post, SourceLoc loc) const {
    if (code.lookup(p.elem).position(v) < 0)
      eval_error(fmt::format("value {} is outside the type of '{}'", v, p.name), loc);
    post[p.offset + pos] = static_cast<Value>(v);
  }

  struct Cursor {
    std::size_t proj = 0, write = 0;
  };

  /// Applies projections from `cur` onward; branches on demonic writes.
  void apply(const CEvent& e, const Value* pre, Cursor cur, std::vector<Value>& post, std::vector<int>& written,
             std::vector<std::vector<Value>>& results) const {
    std::int64_t* env = this->env();
    for (; cur.proj < e.action.size(); ++cur.proj, cur.write = 0) {
      const CProj& p = e.action[cur.proj];
      for (; cur.write < p.writes.size(); ++cur.write) {
        const CWrite& w = p.writes[cur.write];
        Frame f{pre, post.data(), env};
        if (!code.truth(w.cond, f)) continue;
        int pos = -1;
        if (w.index >= 0) {
          std::int64_t i = code.eval(w.index, f);
          pos = code.lookup(p.index).position(i);
          if (pos < 0) eval_error(fmt::format("index {} out of range for '{}'", i, p.name), w.loc);
        }
        // Runtime double-assignment check (element indices may be dynamic).
        auto mark = [&](int slot) {
          if (std::find(written.begin(), written.end(), slot) != written.end())
            throw Error(ErrorKind::DoubleAssignment,
                        fmt::format("'{}' is assigned twice by one occurrence of the event", p.name), w.loc);
          written.push_back(slot);
        };
        if (pos >= 0) mark(p.offset + pos);
        else
          for (int k = 0; k < p.slots; ++k) mark(p.offset + k);

        if (!w.demonic) {
          if (w.agg >= 0) {
            std::vector<std::int64_t> vals;
            eval_agg(w.agg, f, vals, p);
            if (static_cast<int>(vals.size()) != p.slots)
              eval_error(fmt::format("value for '{}' has {} elements, expected {}", p.name, vals.size(), p.slots), w.loc);
            if (p.kind == Type::Kind::Queue) {
              post[p.offset] = static_cast<Value>(vals[0]);
              for (int k = 1; k < p.slots; ++k) {
                if (k <= vals[0]) store(p, k, vals[static_cast<std::size_t>(k)], post.data(), w.loc);
                else post[p.offset + k] = 0;
              }
            } else {
              for (int k = 0; k < p.slots; ++k) store(p, k, vals[static_cast<std::size_t>(k)], post.data(), w.loc);
            }
          } else {
            store(p, std::max(pos, 0), code.eval(w.value, f), post.data(), w.loc);
          }
          continue;
        }

        // Demonic write: one branch per value.
        std::vector<std::int64_t> choices;
        if (w.dom >= 0) {
          choices = code.lookup(w.dom).values;
        } else {
          std::int64_t lo = code.eval(w.lo, f), hi = code.eval(w.hi, f);
          if (hi - lo > 100000) eval_error("demonic range too large", w.loc);
          for (std::int64_t v = lo; v <= hi; ++v) choices.push_back(v);
        }
        if (choices.empty()) eval_error(fmt::format("empty demonic choice for '{}'", p.name), w.loc);
        Cursor next = cur;
        ++next.write;
        if (w.whole_array_demonic) {
          std::vector<std::size_t> idx(static_cast<std::size_t>(p.slots), 0);
          while (true) {
            std::vector<Value> branch = post;
            for (int k = 0; k < p.slots; ++k) store(p, k, choices[idx[static_cast<std::size_t>(k)]], branch.data(), w.loc);
            std::vector<int> wr = written;
            apply(e, pre, next, branch, wr, results);
            int k = p.slots - 1;
            while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == choices.size()) idx[static_cast<std::size_t>(k--)] = 0;
            if (k < 0) break;
          }
        } else {
          for (auto v : choices) {
            std::vector<Value> branch = post;
            store(p, std::max(pos, 0), v, branch.data(), w.loc);
            std::vector<int> wr = written;
            apply(e, pre, next, branch, wr, results);
          }
        }
        return;
      }
    }
    results.push_back(std::move(post));
  }

  void event_step(const Value* pre, int slot, int dem, std::vector<std::vector<Value>>& out) const {
    const ClockSlot& cs = slots[static_cast<std::size_t>(slot)];
    const CEvent& e = events[static_cast<std::size_t>(cs.event)];
    std::int64_t* env = this->env();
    std::vector<std::vector<Value>> results;
    std::vector<Value> post(pre, pre + width);
    std::vector<int> written;
    set_fair(e, cs.fair, env);
    set_dem(e, dem, env);
    apply(e, pre, Cursor{}, post, written, results);
    for (auto& r : results) finish_event(pre, slot, dem, r.data());
    for (auto& r : results) out.push_back(std::move(r));
  }

  void compile();
  int compile_agg(const Expr& e, const FlatModel& m, Compiler& comp, const elab::FlatVar& v);
};

// ---------------------------------------------------------------- compilation

int Compiled::compile_agg(const Expr& e, const FlatModel& model, Compiler& comp, const elab::FlatVar& v) {
  Agg a;
  a.loc = e.loc;
  if (e.kind == ExprKind::Name) {
    const auto* src = model.find_var(e.name);
    if (!src || !(src->type == v.type))
      throw Error(ErrorKind::TypeError, fmt::format("cannot assign '{}' to '{}'", syntax::print(e), v.name), e.loc);
    a.kind = Agg::Kind::Var;
    a.offset = var_off[static_cast<std::size_t>(src - model.vars.data())];
    a.primed = e.primed;
  } else if (e.kind == ExprKind::SetLit && v.type.kind == Type::Kind::Array) {
    a.kind = Agg::Kind::List;
    for (const auto& k : e.kids) a.nodes.push_back(comp.scalar(k));
  } else if (e.kind == ExprKind::Method && v.type.kind == Type::Kind::Queue &&
             (e.name == "Enqueue" || e.name == "Dequeue")) {
    a.kind = e.name == "Enqueue" ? Agg::Kind::Enqueue : Agg::Kind::Dequeue;
    std::size_t want = a.kind == Agg::Kind::Enqueue ? 2 : 1;
    if (e.kids.size() != want)
      throw Error(ErrorKind::ArityError, fmt::format("{}() takes {} argument(s)", e.name, want - 1), e.loc);
    a.child = compile_agg(e.kids[0], model, comp, v);
    if (a.kind == Agg::Kind::Enqueue) a.nodes.push_back(comp.scalar(e.kids[1]));
  } else {
    throw Error(ErrorKind::TypeError,
                fmt::format("'{}' cannot be assigned to the {} '{}'", syntax::print(e),
                            v.type.kind == Type::Kind::Array ? "array" : "queue", v.name),
                e.loc);
  }
  aggs.push_back(std::move(a));
  return static_cast<int>(aggs.size()) - 1;
}

void Compiled::compile() {
  int off = 0;
  for (std::size_t i = 0; i < m.vars.size(); ++i) {
    const auto& v = m.vars[i];
    var_off.push_back(off);
    var_elem.push_back(code.add_lookup(v.type.element));
    if (v.type.kind == Type::Kind::Array) array_lookup[static_cast<int>(i)] = code.add_lookup(v.type.index);
    off += v.type.slots();
  }
  timer_base = off;
  off += static_cast<int>(m.timers.size());
  mono_base = off;
  off += static_cast<int>(m.timers.size());
  clock_base = off;

  auto resolve = [this](const std::string& name, bool, SourceLoc) { return bind(name); };
  Compiler comp(m, code, resolve);

  for (std::size_t ei = 0; ei < m.events.size(); ++ei) {
    const auto& fe = m.events[ei];
    CEvent ce;
    ce.first_slot = static_cast<int>(slots.size());
    std::vector<elab::Domain> fdoms, ddoms;
    for (const auto& x : fe.f_ind) {
      ce.fair_env.push_back(code.new_env());
      comp.push(x.name, ce.fair_env.back());
      fdoms.push_back(x.domain);
    }
    for (const auto& x : fe.d_ind) {
      ce.dem_env.push_back(code.new_env());
      comp.push(x.name, ce.dem_env.back());
      ddoms.push_back(x.domain);
    }
    cartesian(fdoms, [&](const auto& v) { ce.fair_vals.push_back(v); });
    cartesian(ddoms, [&](const auto& v) { ce.dem_vals.push_back(v); });
    if (ce.fair_vals.size() > 4096 || ce.dem_vals.size() > 4096)
      throw Error(ErrorKind::BoundError, fmt::format("event '{}' has too many index valuations", fe.id), fe.loc);
    for (std::size_t k = 0; k < ce.fair_vals.size(); ++k)
      slots.push_back(ClockSlot{static_cast<int>(ei), static_cast<int>(k), ce.fair_vals[k]});

    ce.guard = comp.scalar(fe.guard);
    ce.timed_guard = mentions_timer(fe.guard, m);
    ce.l = fe.l;
    ce.u = fe.u ? *fe.u : kInfinity;
    for (const auto& t : fe.start) {
      const auto* tm = m.find_timer(t);
      if (!tm) throw Error(ErrorKind::UnknownReference, fmt::format("unknown timer '{}'", t), fe.loc);
      ce.start.push_back(static_cast<int>(tm - m.timers.data()));
    }
    for (const auto& t : fe.stop) {
      const auto* tm = m.find_timer(t);
      if (!tm) throw Error(ErrorKind::UnknownReference, fmt::format("unknown timer '{}'", t), fe.loc);
      ce.stop.push_back(static_cast<int>(tm - m.timers.data()));
    }

    for (const auto& proj : fe.action) {
      const auto* v = m.find_var(proj.var);
      if (!v) {
        if (m.find_timer(proj.var))
          throw Error(ErrorKind::TypeError, fmt::format("timer '{}' cannot be assigned; use start/stop", proj.var),
                      proj.writes.front().loc);
        throw Error(ErrorKind::UnknownReference, fmt::format("assignment to unknown variable '{}'", proj.var),
                    proj.writes.front().loc);
      }
      int vi = static_cast<int>(v - m.vars.data());
      CProj cp;
      cp.var = vi;
      cp.offset = var_off[static_cast<std::size_t>(vi)];
      cp.slots = v->type.slots();
      cp.kind = v->type.kind;
      cp.elem = var_elem[static_cast<std::size_t>(vi)];
      cp.capacity = static_cast<int>(v->type.capacity);
      cp.name = v->name;
      if (cp.kind == Type::Kind::Array) cp.index = array_lookup[vi];
      for (const auto& w : proj.writes) {
        CWrite cw;
        cw.loc = w.loc;
        cw.cond = comp.scalar(w.condition);
        cw.demonic = w.demonic;
        if (w.index) {
          if (cp.kind != Type::Kind::Array)
            throw Error(ErrorKind::TypeError, fmt::format("'{}' is not an array", v->name), w.loc);
          cw.index = comp.scalar(*w.index);
        }
        const bool whole = !w.index && cp.kind != Type::Kind::Scalar;
        if (!w.demonic) {
          if (whole) cw.agg = compile_agg(w.value, m, comp, *v);
          else cw.value = comp.scalar(w.value);
        } else if (w.value.kind == ExprKind::ArrayOf) {
          if (!whole || cp.kind != Type::Kind::Array)
            throw Error(ErrorKind::TypeError, fmt::format("ARRAY[..](n) choice needs a whole array, not '{}'", v->name),
                        w.loc);
          auto n = m.try_const(w.value.kids[1]);
          if (!n || *n != cp.slots)
            throw Error(ErrorKind::TypeError,
                        fmt::format("ARRAY choice length must equal the length of '{}' ({})", v->name, cp.slots), w.loc);
          cw.whole_array_demonic = true;
          cw.dom = code.add_lookup(comp.domain(w.value.kids[0]));
        } else {
          if (whole)
            throw Error(ErrorKind::TypeError, fmt::format("demonic choice for '{}' needs ARRAY[S](n)", v->name), w.loc);
          if (w.value.kind == ExprKind::Range && (!m.try_const(w.value.kids[0]) || !m.try_const(w.value.kids[1]))) {
            cw.lo = comp.scalar(w.value.kids[0]);
            cw.hi = comp.scalar(w.value.kids[1]);
          } else {
            elab::Domain d = comp.domain(w.value);
            if (d.empty()) throw Error(ErrorKind::TypeError, "empty demonic choice", w.loc);
            cw.dom = code.add_lookup(d);
          }
        }
        cp.writes.push_back(std::move(cw));
      }
      ce.action.push_back(std::move(cp));
    }
    for (std::size_t k = 0; k < fe.f_ind.size() + fe.d_ind.size(); ++k) comp.pop();
    events.push_back(std::move(ce));
  }
  off += static_cast<int>(slots.size());
  x_off = off++;
  p_off = off;
  off += 2;
  width = off;
}

// ---------------------------------------------------------------- System

System::System(const FlatModel& model)
    : model_(std::make_shared<const FlatModel>(model)), impl_(std::make_unique<Compiled>(*model_)) {
  impl_->compile();
}

System::~System() = default;
System::System(System&&) noexcept = default;

int System::width() const { return impl_->width; }
int System::var_offset(int var) const { return impl_->var_off.at(static_cast<std::size_t>(var)); }
int System::timer_offset(int timer) const { return impl_->timer_base + timer; }
int System::mono_offset(int timer) const { return impl_->mono_base + timer; }
int System::clock_offset(int slot) const { return impl_->clock_base + slot; }
int System::x_offset() const { return impl_->x_off; }
int System::p_offset() const { return impl_->p_off; }
int System::slot_count() const { return static_cast<int>(impl_->slots.size()); }
const ClockSlot& System::slot(int s) const { return impl_->slots.at(static_cast<std::size_t>(s)); }
int System::first_slot(int event) const { return impl_->events.at(static_cast<std::size_t>(event)).first_slot; }
int System::fair_count(int event) const {
  return static_cast<int>(impl_->events.at(static_cast<std::size_t>(event)).fair_vals.size());
}
int System::demonic_count(int event) const {
  return static_cast<int>(impl_->events.at(static_cast<std::size_t>(event)).dem_vals.size());
}
const std::vector<std::int64_t>& System::demonic_values(int event, int ordinal) const {
  return impl_->events.at(static_cast<std::size_t>(event)).dem_vals.at(static_cast<std::size_t>(ordinal));
}

int System::find_slot(int event, const std::vector<std::int64_t>& fair) const {
  const CEvent& e = impl_->events.at(static_cast<std::size_t>(event));
  for (std::size_t k = 0; k < e.fair_vals.size(); ++k)
    if (e.fair_vals[k] == fair) return e.first_slot + static_cast<int>(k);
  return -1;
}

int System::find_demonic(int event, const std::vector<std::int64_t>& values) const {
  const CEvent& e = impl_->events.at(static_cast<std::size_t>(event));
  for (std::size_t k = 0; k < e.dem_vals.size(); ++k)
    if (e.dem_vals[k] == values) return static_cast<int>(k);
  return -1;
}

Binding System::binding(const std::string& name, bool) const { return impl_->bind(name); }

Configuration System::initial() const {
  const Compiled& c = *impl_;
  Configuration cfg(static_cast<std::size_t>(c.width), 0);
  for (std::size_t i = 0; i < model_->vars.size(); ++i) {
    const auto& v = model_->vars[i];
    for (std::size_t k = 0; k < v.init.size(); ++k)
      cfg[static_cast<std::size_t>(c.var_off[i]) + k] = static_cast<Value>(v.init[k]);
  }
  for (std::size_t t = 0; t < model_->timers.size(); ++t) {
    cfg[static_cast<std::size_t>(c.timer_base) + t] = static_cast<Value>(model_->timers[t].init);
    cfg[static_cast<std::size_t>(c.mono_base) + t] = 1;
  }
  for (int s = 0; s < slot_count(); ++s) cfg[static_cast<std::size_t>(c.clock_base + s)] = c.guard(cfg.data(), s) ? 0 : -1;
  cfg[static_cast<std::size_t>(c.x_off)] = -1;
  cfg[static_cast<std::size_t>(c.p_off)] = -1;
  cfg[static_cast<std::size_t>(c.p_off) + 1] = 0;
  return cfg;
}

bool System::enabled_slot(const Value* c, int slot) const { return impl_->en(c, slot); }
bool System::guard(const Value* s, int slot) const { return impl_->guard(s, slot); }

std::vector<TransitionName> System::enabled(const Configuration& cfg) const {
  const Compiled& c = *impl_;
  std::vector<TransitionName> out;
  Value x = cfg[static_cast<std::size_t>(c.x_off)];
  if (x != -1) {
    int ev = c.slots[static_cast<std::size_t>(x)].event;
    for (int d = 0; d < demonic_count(ev); ++d)
      if (c.guard_with(cfg.data(), x, d)) out.push_back(TransitionName::event(x, d));
    return out;
  }
  for (int s = 0; s < slot_count(); ++s)
    if (c.en(cfg.data(), s)) out.push_back(TransitionName::hash(s));
  if (c.tick_allowed(cfg.data())) out.push_back(TransitionName::tick());
  return out;
}

std::vector<Successor> System::step(const Configuration& cfg, const TransitionName& t) const {
  const Compiled& c = *impl_;
  if (static_cast<int>(cfg.size()) != c.width) throw Error(ErrorKind::NotEnabled, "configuration has the wrong width");
  const Value* pre = cfg.data();
  Value x = pre[c.x_off];
  std::vector<Successor> out;
  switch (t.kind) {
    case TransitionName::Kind::Tick: {
      if (!c.tick_allowed(pre)) throw Error(ErrorKind::NotEnabled, "tick is not enabled");
      Configuration post(cfg.size());
      c.tick_step(pre, post.data());
      out.push_back({t, std::move(post)});
      return out;
    }
    case TransitionName::Kind::Hash: {
      if (t.slot < 0 || t.slot >= slot_count() || x != -1 || !c.en(pre, t.slot))
        throw Error(ErrorKind::NotEnabled, fmt::format("'{}' is not enabled", render(t)));
      Configuration post(cfg.size());
      c.hash_step(pre, t.slot, post.data());
      out.push_back({t, std::move(post)});
      return out;
    }
    case TransitionName::Kind::Event: {
      if (t.slot < 0 || t.slot >= slot_count() || x != t.slot || t.demonic < 0 ||
          t.demonic >= demonic_count(c.slots[static_cast<std::size_t>(t.slot)].event) ||
          !c.guard_with(pre, t.slot, t.demonic))
        throw Error(ErrorKind::NotEnabled, fmt::format("'{}' is not enabled", render(t)));
      std::vector<std::vector<Value>> posts;
      c.event_step(pre, t.slot, t.demonic, posts);
      for (auto& p : posts) out.push_back({t, std::move(p)});
      return out;
    }
  }
  return out;
}

void System::successors(const Value* pre, std::vector<Successor>& out) const {
  Configuration cfg(pre, pre + width());
  for (const auto& t : enabled(cfg))
    for (auto& s : step(cfg, t)) out.push_back(std::move(s));
}

void System::successor_configs(const Value* pre, std::vector<Value>& out) const {
  const Compiled& c = *impl_;
  const std::size_t w = static_cast<std::size_t>(c.width);
  Value x = pre[c.x_off];
  if (x != -1) {
    int ev = c.slots[static_cast<std::size_t>(x)].event;
    std::vector<std::vector<Value>> posts;
    for (int d = 0; d < demonic_count(ev); ++d)
      if (c.guard_with(pre, x, d)) c.event_step(pre, x, d, posts);
    for (const auto& p : posts) out.insert(out.end(), p.begin(), p.end());
    return;
  }
  for (int s = 0; s < slot_count(); ++s)
    if (c.en(pre, s)) {
      out.resize(out.size() + w);
      c.hash_step(pre, s, out.data() + out.size() - w);
    }
  if (c.tick_allowed(pre)) {
    out.resize(out.size() + w);
    c.tick_step(pre, out.data() + out.size() - w);
  }
}

TransitionName System::last(const Value* c) const {
  Value p = c[impl_->p_off];
  if (p < 0) return TransitionName::tick();
  if (p % 2 == 0) return TransitionName::hash(p / 2);
  return TransitionName::event(p / 2, c[impl_->p_off + 1]);
}

std::string System::slot_name(int s) const {
  return render(TransitionName::hash(s)).erase(model_->events[static_cast<std::size_t>(slot(s).event)].id.size(), 1);
}

std::string System::render(const TransitionName& t) const {
  if (t.kind == TransitionName::Kind::Tick) return "tick";
  const ClockSlot& cs = slot(t.slot);
  const auto& fe = model_->events[static_cast<std::size_t>(cs.event)];
  std::vector<std::string> args;
  for (std::size_t i = 0; i < cs.values.size(); ++i) args.push_back(model_->render(fe.f_ind[i].domain, cs.values[i]));
  if (t.kind == TransitionName::Kind::Event) {
    const auto& dv = demonic_values(cs.event, t.demonic);
    for (std::size_t i = 0; i < dv.size(); ++i) args.push_back(model_->render(fe.d_ind[i].domain, dv[i]));
  }
  std::string out = fe.id;
  if (t.kind == TransitionName::Kind::Hash) out += '#';
  if (!args.empty()) out += fmt::format("({})", fmt::join(args, ", "));
  return out;
}

std::optional<TransitionName> System::parse_transition(std::string_view text) const {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text == "tick") return TransitionName::tick();
  std::string_view head = text;
  std::vector<std::string_view> args;
  if (auto open = text.find('('); open != std::string_view::npos) {
    if (text.back() != ')') return std::nullopt;
    head = trim(text.substr(0, open));
    std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    while (!trim(inner).empty()) {
      auto comma = inner.find(',');
      args.push_back(trim(inner.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      inner.remove_prefix(comma + 1);
    }
  }
  bool hash = !head.empty() && head.back() == '#';
  if (hash) head.remove_suffix(1);
  const auto* fe = model_->find_event(head);
  if (!fe) return std::nullopt;
  int ev = static_cast<int>(fe - model_->events.data());
  std::size_t nf = fe->f_ind.size(), nd = hash ? 0 : fe->d_ind.size();
  if (args.size() != nf + nd) return std::nullopt;
  auto value_of = [&](const elab::Domain& d, std::string_view a) -> std::optional<std::int64_t> {
    for (auto v : d.values)
      if (model_->render(d, v) == a) return v;
    return std::nullopt;
  };
  std::vector<std::int64_t> fv, dv;
  for (std::size_t i = 0; i < nf; ++i) {
    auto v = value_of(fe->f_ind[i].domain, args[i]);
    if (!v) return std::nullopt;
    fv.push_back(*v);
  }
  for (std::size_t i = 0; i < nd; ++i) {
    auto v = value_of(fe->d_ind[i].domain, args[nf + i]);
    if (!v) return std::nullopt;
    dv.push_back(*v);
  }
  int s = find_slot(ev, fv);
  if (s < 0) return std::nullopt;
  if (hash) return TransitionName::hash(s);
  int d = find_demonic(ev, dv);
  if (d < 0) return std::nullopt;
  return TransitionName::event(s, d);
}

namespace {

nlohmann::json value_json(const FlatModel& m, const elab::Domain& d, std::int64_t v) {
  if (d.kind == elab::ScalarKind::Int) return v;
  if (d.kind == elab::ScalarKind::Bool) return v != 0;
  return m.render(d, v);
}

}  // namespace

std::string System::to_json(const Configuration& cfg, int indent) const {
  const Compiled& c = *impl_;
  nlohmann::json j;
  nlohmann::json state = nlohmann::json::object();
  for (std::size_t i = 0; i < model_->vars.size(); ++i) {
    const auto& v = model_->vars[i];
    const Value* s = cfg.data() + c.var_off[i];
    switch (v.type.kind) {
      case Type::Kind::Scalar:
        state[v.name] = value_json(*model_, v.type.element, s[0]);
        break;
      case Type::Kind::Array: {
        nlohmann::json a = nlohmann::json::object();
        for (std::size_t k = 0; k < v.type.index.size(); ++k)
          a[model_->render(v.type.index, v.type.index.values[k])] = value_json(*model_, v.type.element, s[k]);
        state[v.name] = std::move(a);
        break;
      }
      case Type::Kind::Queue: {
        nlohmann::json a = nlohmann::json::array();
        for (Value k = 0; k < s[0]; ++k) a.push_back(value_json(*model_, v.type.element, s[k + 1]));
        state[v.name] = std::move(a);
        break;
      }
    }
  }
  j["state"] = std::move(state);
  nlohmann::json timers = nlohmann::json::object();
  for (std::size_t t = 0; t < model_->timers.size(); ++t)
    timers[model_->timers[t].name] = {{"value", cfg[static_cast<std::size_t>(c.timer_base) + t]},
                                      {"mono", cfg[static_cast<std::size_t>(c.mono_base) + t] != 0}};
  j["timers"] = std::move(timers);
  nlohmann::json clocks = nlohmann::json::object();
  for (int s = 0; s < slot_count(); ++s)
    clocks[slot_name(s)] = cfg[static_cast<std::size_t>(c.clock_base + s)];
  j["clocks"] = std::move(clocks);
  Value x = cfg[static_cast<std::size_t>(c.x_off)];
  j["pending"] = x == -1 ? nlohmann::json(nullptr) : nlohmann::json(render(TransitionName::hash(x)));
  j["last"] = has_last(cfg.data()) ? nlohmann::json(render(last(cfg.data()))) : nlohmann::json(nullptr);
  return j.dump(indent);
}

std::string System::describe(const Configuration& cfg) const {
  nlohmann::json j = nlohmann::json::parse(to_json(cfg));
  std::string out;
  for (auto& [k, v] : j["state"].items()) out += fmt::format("  {} = {}\n", k, v.dump());
  for (auto& [k, v] : j["timers"].items())
    out += fmt::format("  timer {} = {}{}\n", k, v["value"].get<int>(), v["mono"].get<bool>() ? "" : " (not mono)");
  std::vector<std::string> clocks;
  for (auto& [k, v] : j["clocks"].items()) clocks.push_back(fmt::format("{}={}", k, v.get<int>()));
  if (!clocks.empty()) out += fmt::format("  clocks: {}\n", fmt::join(clocks, " "));
  if (!j["pending"].is_null()) out += fmt::format("  pending: {}\n", j["pending"].get<std::string>());
  out += fmt::format("  last: {}\n", j["last"].is_null() ? std::string("-") : j["last"].get<std::string>());
  return out;
}

std::uint64_t System::digest(const Configuration& c) const { return fnv1a64(to_json(c)); }

std::string System::violated_invariant(const Value* c) const {
  const Compiled& k = *impl_;
  for (std::size_t t = 0; t < model_->timers.size(); ++t) {
    Value v = c[k.timer_base + static_cast<int>(t)];
    if (v < 0 || v > model_->timers[t].bound + 1)
      return fmt::format("timer '{}' = {} outside 0..{}", model_->timers[t].name, v, model_->timers[t].bound + 1);
    Value m = c[k.mono_base + static_cast<int>(t)];
    if (m != 0 && m != 1) return fmt::format("monotonicity flag of '{}' is {}", model_->timers[t].name, m);
  }
  for (int s = 0; s < slot_count(); ++s) {
    const CEvent& e = k.events[static_cast<std::size_t>(k.slots[static_cast<std::size_t>(s)].event)];
    Value v = c[k.clock_base + s];
    if (v < -1 || (e.u != kInfinity && v > e.u))
      return fmt::format("clock of '{}' = {} outside its range", render(TransitionName::hash(s)), v);
  }
  Value x = c[k.x_off];
  if (x < -1 || x >= slot_count()) return fmt::format("pending marker {} out of range", x);
  if (x != -1 && c[k.p_off] != 2 * x) return "pending event is not the last e# transition";
  return {};
}

}  // namespace ttm::lts
