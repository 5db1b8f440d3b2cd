#include "ttm/check/checker.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "ttm/syntax/printer.hpp"

namespace ttm::check {

using lts::Configuration;
using lts::System;
using lts::TransitionName;
using lts::Value;
using syntax::Expr;
using syntax::ExprKind;
using syntax::Op;

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------- fairness

std::vector<FairnessObligation> obligations(const System& sys) {
  std::vector<FairnessObligation> out;
  const auto& events = sys.model().events;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto& ev = events[e];
    std::optional<FairnessObligation::Kind> kind;
    if (ev.fair == syntax::Fairness::Compassionate) kind = FairnessObligation::Kind::Compassion;
    else if (ev.fair == syntax::Fairness::Just || ev.u) kind = FairnessObligation::Kind::Justice;
    if (!kind) continue;
    const int first = sys.first_slot(static_cast<int>(e));
    for (int k = 0; k < sys.fair_count(static_cast<int>(e)); ++k) out.push_back({*kind, first + k});
  }
  return out;
}

bool obligation_enabled(const System& sys, const Value* c, const FairnessObligation& o) {
  return sys.enabled_slot(c, o.slot);
}

bool obligation_taken(const System& sys, const Value* c, const FairnessObligation& o) {
  return c[sys.p_offset()] == 2 * o.slot + 1;
}

// ---------------------------------------------------------------- atoms

StateEvaluator::StateEvaluator(const System& sys, const std::vector<Expr>& atoms)
    : sys_(sys), code_(std::make_unique<lts::Code>()) {
  const auto& m = sys.model();
  // Lookup ids in a system binding refer to the system's own code.
  auto resolve = [&sys, &m, this](const std::string& name, bool, SourceLoc) {
    lts::Binding b = sys.binding(name, false);
    if (b.kind == lts::Binding::Kind::Array) b.lookup = code_->add_lookup(m.find_var(name)->type.index);
    b.element = -1;
    return b;
  };
  auto hook = [&sys, &m](const Expr& e, lts::Compiler& comp) -> std::optional<int> {
    lts::Node n;
    n.loc = e.loc;
    if (e.name == "mono" && e.kids.size() == 1 && e.kids[0].kind == ExprKind::Name) {
      const auto* t = m.find_timer(e.kids[0].name);
      if (!t) throw Error(ErrorKind::UnknownAtom, fmt::format("'{}' is not a timer", e.kids[0].name), e.loc);
      n.kind = lts::NodeKind::Read;
      n.a = sys.mono_offset(static_cast<int>(t - m.timers.data()));
      return comp.code().add(n);
    }
    const auto* ev = m.find_event(e.name);
    if (!ev) return std::nullopt;
    const int event = static_cast<int>(ev - m.events.data());
    const std::size_t nf = ev->f_ind.size(), nd = ev->d_ind.size();
    if (e.kids.size() != nf && e.kids.size() != nf + nd)
      throw Error(ErrorKind::ArityError, fmt::format("event atom '{}' has the wrong number of arguments", ev->id),
                  e.loc);
    std::vector<std::int64_t> fv, dv;
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
      auto v = m.try_const(e.kids[i]);
      if (!v) throw Error(ErrorKind::UnknownAtom, "event atom arguments must be constants", e.kids[i].loc);
      (i < nf ? fv : dv).push_back(*v);
    }
    int slot = sys.find_slot(event, fv);
    if (slot < 0) throw Error(ErrorKind::UnknownAtom, fmt::format("no such valuation of '{}'", ev->id), e.loc);
    n.kind = lts::NodeKind::Last;
    n.a = sys.p_offset();
    n.v = 2 * slot + 1;
    n.b = -1;
    if (e.kids.size() == nf + nd && nd > 0) {
      n.b = sys.find_demonic(event, dv);
      if (n.b < 0) throw Error(ErrorKind::UnknownAtom, fmt::format("no such valuation of '{}'", ev->id), e.loc);
    }
    return comp.code().add(n);
  };
  lts::Compiler comp(m, *code_, resolve, hook);
  for (const auto& a : atoms) roots_.push_back(comp.scalar(a));
}

StateEvaluator::~StateEvaluator() = default;

bool StateEvaluator::eval(int atom, const Value* c) const {
  thread_local std::vector<std::int64_t> env;
  if (env.size() < static_cast<std::size_t>(code_->env_size()) + 1) env.resize(static_cast<std::size_t>(code_->env_size()) + 1);
  return code_->truth(roots_[static_cast<std::size_t>(atom)], lts::Frame{c, nullptr, env.data()});
}

std::uint64_t StateEvaluator::mask(const Value* c) const {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < roots_.size(); ++i)
    if (eval(static_cast<int>(i), c)) m |= std::uint64_t{1} << i;
  return m;
}

std::optional<Expr> invariant_body(const Expr& f) {
  if (f.kind == ExprKind::Temporal && f.op == Op::Always && is_temporal_free(f.kids[0])) return f.kids[0];
  return std::nullopt;
}

// ---------------------------------------------------------------- helpers

namespace {

[[noreturn]] void deadlock(const System& sys, const Configuration& c) {
  throw Error(ErrorKind::Deadlock,
              fmt::format("no transition (not even tick) is enabled in a reachable configuration:\n{}", sys.describe(c)));
}

bool same_erased(const System& sys, const Configuration& a, const Value* b) {
  const std::size_t p = static_cast<std::size_t>(sys.p_offset());
  return std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(p), b);
}

/// Rebuilds real configurations (with the last-transition component) along
/// a path of stored configurations.
Counterexample materialize(const System& sys, const std::vector<const Value*>& path, bool ignore_last,
                           std::optional<std::size_t> loop_start) {
  Counterexample cex;
  cex.configs.push_back(sys.initial());
  const std::size_t w = static_cast<std::size_t>(sys.width());
  for (std::size_t i = 1; i < path.size(); ++i) {
    std::vector<lts::Successor> succ;
    sys.successors(cex.configs.back().data(), succ);
    bool found = false;
    for (auto& s : succ) {
      bool match = ignore_last ? same_erased(sys, s.config, path[i])
                               : std::equal(s.config.begin(), s.config.end(), path[i], path[i] + w);
      if (match) {
        cex.labels.push_back(s.name);
        cex.configs.push_back(std::move(s.config));
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorKind::ReplayDivergence, "counterexample path does not follow the transition relation");
  }
  cex.loop_start = loop_start;
  if (loop_start && cex.configs.back() != cex.configs[*loop_start]) {
    // The loop closes up to the last-transition component; a second pass
    // around the cycle enters the loop start through the same transition.
    const std::size_t k = *loop_start, n = cex.labels.size();
    for (std::size_t i = k; i < n; ++i) {
      auto succ = sys.step(cex.configs.back(), cex.labels[i]);
      const Value* want = cex.configs[i + 1].data();
      bool found = false;
      for (auto& s : succ)
        if (same_erased(sys, s.config, want)) {
          cex.labels.push_back(s.name);
          cex.configs.push_back(std::move(s.config));
          found = true;
          break;
        }
      if (!found) throw Error(ErrorKind::ReplayDivergence, "lasso cycle does not replay");
    }
    cex.loop_start = n;
  }
  return cex;
}

}  // namespace

// ---------------------------------------------------------------- ModelChecker

ModelChecker::ModelChecker(const System& sys, CheckOptions opts) : sys_(sys), opts_(opts) {
  if (opts_.fairness) obligations_ = obligations(sys);
}

ModelChecker::~ModelChecker() = default;

const lts::LtsGraph& ModelChecker::graph() {
  if (!graph_) {
    lts::ExploreOptions eo = opts_.explore;
    eo.keep_edges = true;
    eo.ignore_last = false;
    graph_ = std::make_unique<lts::LtsGraph>(lts::explore(sys_, eo));
    if (!graph_->deadlocks.empty()) deadlock(sys_, graph_->store.config(graph_->deadlocks.front()));
  }
  return *graph_;
}

Verdict ModelChecker::check(const Expr& f) {
  if (opts_.invariant_fast_path)
    if (auto body = invariant_body(f)) return check_invariant(*body);
  return check_ltl(f);
}

Verdict ModelChecker::check_invariant(const Expr& p) {
  const auto t0 = std::chrono::steady_clock::now();
  StateEvaluator eval(sys_, {p});
  const bool erase = !has_event_atoms(p, sys_.model());
  const std::size_t w = static_cast<std::size_t>(sys_.width());
  lts::StateStore store(sys_.width());
  std::vector<std::uint32_t> parent;
  Configuration init = sys_.initial();
  if (erase) lts::erase_last(sys_, init.data());
  store.insert(init.data());
  parent.push_back(0);

  Verdict v;
  v.method = "invariant";
  std::vector<Value> buf;
  std::optional<std::uint32_t> bad;
  if (!eval.eval(0, sys_.initial().data())) bad = 0;
  std::size_t transitions = 0;
  for (std::uint32_t cur = 0; !bad && cur < store.size(); ++cur) {
    buf.clear();
    // Successors of a stored configuration; with erased p the real
    // configuration does not matter for the state part.
    sys_.successor_configs(store.get(cur), buf);
    const std::size_t n = buf.size() / w;
    if (n == 0) deadlock(sys_, store.config(cur));
    transitions += n;
    for (std::size_t j = 0; j < n; ++j) {
      Value* c = buf.data() + j * w;
      bool ok = eval.eval(0, c);  // before erasing: event atoms read p
      if (erase) lts::erase_last(sys_, c);
      auto [id, fresh] = store.insert(c);
      if (!fresh) continue;
      parent.push_back(cur);
      if (store.size() > opts_.explore.max_states || store.bytes() > opts_.explore.max_bytes)
        throw Error(ErrorKind::StateLimitExceeded,
                    fmt::format("state limit exceeded after {} configurations (limit {})", store.size(),
                                opts_.explore.max_states));
      if (!ok) {
        bad = id;
        break;
      }
    }
  }
  v.stats.states = store.size();
  v.stats.transitions = transitions;
  if (bad) {
    v.holds = false;
    std::vector<const Value*> path;
    for (std::uint32_t s = *bad;; s = parent[s]) {
      path.push_back(store.get(s));
      if (s == 0) break;
    }
    std::reverse(path.begin(), path.end());
    v.counterexample = materialize(sys_, path, erase, std::nullopt);
  }
  v.stats.seconds = since(t0);
  return v;
}

namespace {

/// Product of the explored graph with a Buchi automaton, searched for a
/// reachable fair accepting strongly connected component.
class Product {
 public:
  Product(const System& sys, const lts::LtsGraph& g, const Buchi& b, const StateEvaluator& atoms,
          const std::vector<FairnessObligation>& obs, std::size_t max_nodes)
      : sys_(sys), g_(g), b_(b), obs_(obs) {
    nq_ = b.states.size();
    masks_.resize(g.size());
    for (std::uint32_t c = 0; c < g.size(); ++c) masks_[c] = atoms.mask(g.store.get(c));
    if (g.size() * nq_ > std::numeric_limits<std::int32_t>::max())
      throw Error(ErrorKind::StateLimitExceeded, "product state space exceeds the index range");
    pid_.assign(g.size() * nq_, -1);
    // Reachable product, breadth first; ids follow BFS order.
    for (int q : b.initial)
      if (b.states[static_cast<std::size_t>(q)].accepts(masks_[0])) add(0, q, -1);
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
      for_succ(static_cast<int>(u), [&](std::uint32_t c, int q) {
        if (pid_[c * nq_ + static_cast<std::size_t>(q)] < 0) {
          add(c, q, static_cast<int>(u));
          if (nodes_.size() > max_nodes)
            throw Error(ErrorKind::StateLimitExceeded,
                        fmt::format("product exceeds {} states", max_nodes));
        }
        return true;
      });
    }
  }

  std::size_t size() const { return nodes_.size(); }

  /// Node set of a fair accepting SCC, or empty.
  std::vector<int> search() {
    region_.assign(nodes_.size(), 0);
    std::vector<std::pair<int, std::vector<int>>> work;
    std::vector<int> all(nodes_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    work.emplace_back(0, std::move(all));
    int next_region = 1;
    while (!work.empty()) {
      auto [r, members] = std::move(work.back());
      work.pop_back();
      for (auto& scc : tarjan(r, members)) {
        const int rs = next_region++;
        for (int u : scc) region_[static_cast<std::size_t>(u)] = rs;
        if (!nontrivial(scc, rs)) continue;
        if (!accepting(scc)) continue;
        std::vector<const FairnessObligation*> bad;
        for (const auto& o : obs_)
          if (o.kind == FairnessObligation::Kind::Compassion && any(scc, o, true) && !any_taken(scc, o))
            bad.push_back(&o);
        if (bad.empty()) {
          bool just = true;
          for (const auto& o : obs_)
            if (o.kind == FairnessObligation::Kind::Justice && !any(scc, o, false) && !any_taken(scc, o)) just = false;
          if (just) {
            found_region_ = rs;
            return scc;
          }
          continue;
        }
        std::vector<int> rest;
        for (int u : scc) {
          bool drop = false;
          for (const auto* o : bad)
            if (obligation_enabled(sys_, config(u), *o)) drop = true;
          if (drop) region_[static_cast<std::size_t>(u)] = -1;
          else rest.push_back(u);
        }
        if (!rest.empty()) work.emplace_back(rs, std::move(rest));
      }
    }
    return {};
  }

  /// Lasso through the SCC found by search(): product node ids.
  std::pair<std::vector<int>, std::size_t> lasso(const std::vector<int>& scc) {
    const int rs = found_region_;
    int entry = *std::min_element(scc.begin(), scc.end());
    std::vector<int> path;
    for (int u = entry; u >= 0; u = parent_[static_cast<std::size_t>(u)]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    const std::size_t loop_start = path.size() - 1;

    std::vector<std::function<bool(int)>> goals;
    for (const auto& acc : b_.acceptance)
      goals.emplace_back([&acc, this](int u) { return acc[static_cast<std::size_t>(q_of(u))]; });
    for (const auto& o : obs_) {
      if (o.kind == FairnessObligation::Kind::Justice) {
        if (any(scc, o, false))
          goals.emplace_back([&o, this](int u) { return !obligation_enabled(sys_, config(u), o); });
        else
          goals.emplace_back([&o, this](int u) { return obligation_taken(sys_, config(u), o); });
      } else if (any(scc, o, true)) {
        goals.emplace_back([&o, this](int u) { return obligation_taken(sys_, config(u), o); });
      }
    }
    int cur = entry;
    for (const auto& goal : goals) {
      if (goal(cur) && cur != entry) continue;
      auto seg = bfs(cur, rs, goal);
      path.insert(path.end(), seg.begin(), seg.end());
      cur = path.back();
    }
    auto back = bfs(cur, rs, [entry](int u) { return u == entry; });
    path.insert(path.end(), back.begin(), back.end());
    return {path, loop_start};
  }

  std::uint32_t config_id(int u) const { return nodes_[static_cast<std::size_t>(u)].first; }

 private:
  const Value* config(int u) const { return g_.store.get(nodes_[static_cast<std::size_t>(u)].first); }
  int q_of(int u) const { return nodes_[static_cast<std::size_t>(u)].second; }

  void add(std::uint32_t c, int q, int parent) {
    pid_[c * nq_ + static_cast<std::size_t>(q)] = static_cast<int>(nodes_.size());
    nodes_.emplace_back(c, q);
    parent_.push_back(parent);
  }

  /// Calls f(config, q) for every product successor; stops when f returns false.
  template <typename F>
  void for_succ(int u, F&& f) const {
    auto [c, q] = nodes_[static_cast<std::size_t>(u)];
    const auto& qs = b_.states[static_cast<std::size_t>(q)].succ;
    for (const auto* t = g_.begin(c); t != g_.end(c); ++t) {
      const std::uint64_t m = masks_[*t];
      for (int q2 : qs)
        if (b_.states[static_cast<std::size_t>(q2)].accepts(m))
          if (!f(*t, q2)) return;
    }
  }

  int id(std::uint32_t c, int q) const { return pid_[c * nq_ + static_cast<std::size_t>(q)]; }

  std::vector<std::vector<int>> tarjan(int r, const std::vector<int>& members) {
    std::vector<std::vector<int>> out;
    // Local numbering keeps memory proportional to the region.
    std::vector<int>& index = index_;
    std::vector<int>& low = low_;
    if (index.size() < nodes_.size()) {
      index.assign(nodes_.size(), -1);
      low.assign(nodes_.size(), 0);
      on_stack_.assign(nodes_.size(), false);
    }
    int counter = 0;
    std::vector<int> stack;
    struct Frame {
      int u;
      std::vector<int> succ;
      std::size_t i;
    };
    std::vector<Frame> call;
    auto successors = [&](int u) {
      std::vector<int> s;
      for_succ(u, [&](std::uint32_t c, int q) {
        int v = id(c, q);
        if (region_[static_cast<std::size_t>(v)] == r) s.push_back(v);
        return true;
      });
      return s;
    };
    for (int root : members) {
      if (index[static_cast<std::size_t>(root)] >= 0) continue;
      index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
      stack.push_back(root);
      on_stack_[static_cast<std::size_t>(root)] = true;
      call.push_back({root, successors(root), 0});
      while (!call.empty()) {
        Frame& fr = call.back();
        if (fr.i < fr.succ.size()) {
          int v = fr.succ[fr.i++];
          auto vi = static_cast<std::size_t>(v);
          if (index[vi] < 0) {
            index[vi] = low[vi] = counter++;
            stack.push_back(v);
            on_stack_[vi] = true;
            call.push_back({v, successors(v), 0});
          } else if (on_stack_[vi]) {
            low[static_cast<std::size_t>(fr.u)] = std::min(low[static_cast<std::size_t>(fr.u)], index[vi]);
          }
          continue;
        }
        int u = fr.u;
        auto ui = static_cast<std::size_t>(u);
        call.pop_back();
        if (!call.empty()) {
          auto pi = static_cast<std::size_t>(call.back().u);
          low[pi] = std::min(low[pi], low[ui]);
        }
        if (low[ui] == index[ui]) {
          std::vector<int> scc;
          int v;
          do {
            v = stack.back();
            stack.pop_back();
            on_stack_[static_cast<std::size_t>(v)] = false;
            scc.push_back(v);
          } while (v != u);
          out.push_back(std::move(scc));
        }
      }
    }
    // Reset for the next region.
    for (int u : members) index[static_cast<std::size_t>(u)] = -1;
    return out;
  }

  bool nontrivial(const std::vector<int>& scc, int rs) const {
    if (scc.size() > 1) return true;
    bool self = false;
    for_succ(scc[0], [&](std::uint32_t c, int q) {
      int v = id(c, q);
      if (v == scc[0] && region_[static_cast<std::size_t>(v)] == rs) self = true;
      return !self;
    });
    return self;
  }

  bool accepting(const std::vector<int>& scc) const {
    for (const auto& acc : b_.acceptance) {
      bool hit = false;
      for (int u : scc)
        if (acc[static_cast<std::size_t>(q_of(u))]) {
          hit = true;
          break;
        }
      if (!hit) return false;
    }
    return true;
  }

  bool any(const std::vector<int>& scc, const FairnessObligation& o, bool enabled) const {
    for (int u : scc)
      if (obligation_enabled(sys_, config(u), o) == enabled) return true;
    return false;
  }
  bool any_taken(const std::vector<int>& scc, const FairnessObligation& o) const {
    for (int u : scc)
      if (obligation_taken(sys_, config(u), o)) return true;
    return false;
  }

  /// Shortest path (excluding `from`, at least one step) inside region rs
  /// to a node satisfying `goal`.
  template <typename G>
  std::vector<int> bfs(int from, int rs, G&& goal) {
    std::vector<int> pred;
    std::unordered_map<int, int> seen;
    std::deque<int> q;
    for_succ(from, [&](std::uint32_t c, int qq) {
      int v = id(c, qq);
      if (region_[static_cast<std::size_t>(v)] == rs && !seen.count(v)) {
        seen.emplace(v, -1);
        q.push_back(v);
      }
      return true;
    });
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      if (goal(u)) {
        std::vector<int> path;
        for (int x = u; x >= 0; x = seen.at(x)) path.push_back(x);
        std::reverse(path.begin(), path.end());
        return path;
      }
      for_succ(u, [&](std::uint32_t c, int qq) {
        int v = id(c, qq);
        if (region_[static_cast<std::size_t>(v)] == rs && !seen.count(v)) {
          seen.emplace(v, u);
          q.push_back(v);
        }
        return true;
      });
    }
    throw Error(ErrorKind::ReplayDivergence, "internal error: SCC is not strongly connected");
  }

  const System& sys_;
  const lts::LtsGraph& g_;
  const Buchi& b_;
  const std::vector<FairnessObligation>& obs_;
  std::size_t nq_ = 0;
  std::vector<std::uint64_t> masks_;
  std::vector<std::int32_t> pid_;
  std::vector<std::pair<std::uint32_t, int>> nodes_;
  std::vector<int> parent_;
  std::vector<int> region_;
  std::vector<int> index_, low_;
  std::vector<bool> on_stack_;
  int found_region_ = -1;
};

}  // namespace

Verdict ModelChecker::check_ltl(const Expr& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Ltl neg = Ltl::from(f, true);
  Buchi b = build_buchi(neg, opts_.max_automaton_states);
  StateEvaluator atoms(sys_, neg.atoms());
  const lts::LtsGraph& g = graph();
  Product prod(sys_, g, b, atoms, obligations_, opts_.explore.max_states * 16);
  Verdict v;
  v.method = "ltl";
  v.stats.states = g.size();
  v.stats.transitions = g.stats.transitions;
  v.stats.automaton_states = b.states.size();
  v.stats.product_states = prod.size();
  auto scc = prod.search();
  if (!scc.empty()) {
    v.holds = false;
    auto [nodes, loop_start] = prod.lasso(scc);
    std::vector<const Value*> path;
    for (int u : nodes) path.push_back(g.store.get(prod.config_id(u)));
    v.counterexample = materialize(sys_, path, g.ignore_last, loop_start);
  }
  v.stats.seconds = since(t0);
  return v;
}

Verdict check(const System& sys, const Expr& f, const CheckOptions& opts) { return ModelChecker(sys, opts).check(f); }

Verdict check_invariant(const System& sys, const Expr& p, const CheckOptions& opts) {
  return ModelChecker(sys, opts).check_invariant(p);
}

// ---------------------------------------------------------------- validation

namespace {

/// Truth of every subformula over the positions of a lasso.
class LassoEval {
 public:
  LassoEval(const System& sys, const Counterexample& cex) : sys_(sys), cex_(cex) {
    n_ = cex.configs.size() - 1;  // positions 0..n-1; position n == loop start
    k_ = *cex.loop_start;
  }

  std::vector<bool> eval(const Expr& e) {
    if (is_temporal_free(e)) {
      StateEvaluator ev(sys_, {e});
      std::vector<bool> r(n_);
      for (std::size_t i = 0; i < n_; ++i) r[i] = ev.eval(0, cex_.configs[i].data());
      return r;
    }
    switch (e.kind) {
      case ExprKind::Unary: {
        auto a = eval(e.kids[0]);
        a.flip();
        return a;
      }
      case ExprKind::Binary: {
        auto a = eval(e.kids[0]), b = eval(e.kids[1]);
        for (std::size_t i = 0; i < n_; ++i) {
          if (e.op == Op::And) a[i] = a[i] && b[i];
          else if (e.op == Op::Or) a[i] = a[i] || b[i];
          else a[i] = !a[i] || b[i];
        }
        return a;
      }
      case ExprKind::Temporal: {
        if (e.op == Op::Until) return until(eval(e.kids[0]), eval(e.kids[1]));
        auto a = eval(e.kids[0]);
        if (e.op == Op::Eventually) return until(std::vector<bool>(n_, true), a);
        a.flip();
        auto r = until(std::vector<bool>(n_, true), a);
        r.flip();
        return r;
      }
      default: break;
    }
    throw Error(ErrorKind::TypeError, fmt::format("cannot evaluate '{}' on a lasso", syntax::print(e)), e.loc);
  }

 private:
  std::vector<bool> until(const std::vector<bool>& a, const std::vector<bool>& b) const {
    std::vector<bool> r(n_, false);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = n_; i-- > 0;) {
        std::size_t next = i + 1 == n_ ? k_ : i + 1;
        bool v = b[i] || (a[i] && r[next]);
        if (v != r[i]) {
          r[i] = v;
          changed = true;
        }
      }
    }
    return r;
  }

  const System& sys_;
  const Counterexample& cex_;
  std::size_t n_ = 0, k_ = 0;
};

}  // namespace

bool eval_on_lasso(const System& sys, const Expr& f, const Counterexample& cex) {
  if (!cex.loop_start || cex.configs.size() < 2) throw Error(ErrorKind::TypeError, "not a lasso");
  return LassoEval(sys, cex).eval(f)[0];
}

std::vector<std::string> validate(const System& sys, const Counterexample& cex, const Expr& f,
                                  const std::vector<FairnessObligation>& obs) {
  std::vector<std::string> problems;
  if (cex.configs.empty() || cex.configs.size() != cex.labels.size() + 1) {
    problems.push_back("malformed path");
    return problems;
  }
  if (cex.configs[0] != sys.initial()) problems.push_back("path does not start in the initial configuration");
  for (std::size_t i = 0; i < cex.configs.size(); ++i) {
    if (auto bad = sys.violated_invariant(cex.configs[i].data()); !bad.empty())
      problems.push_back(fmt::format("configuration {}: {}", i, bad));
  }
  for (std::size_t i = 0; i < cex.labels.size(); ++i) {
    auto en = sys.enabled(cex.configs[i]);
    if (std::find(en.begin(), en.end(), cex.labels[i]) == en.end()) {
      problems.push_back(fmt::format("step {}: '{}' is not enabled", i, sys.render(cex.labels[i])));
      continue;
    }
    auto succ = sys.step(cex.configs[i], cex.labels[i]);
    if (std::none_of(succ.begin(), succ.end(), [&](const lts::Successor& s) { return s.config == cex.configs[i + 1]; }))
      problems.push_back(fmt::format("step {}: '{}' does not lead to the next configuration", i, sys.render(cex.labels[i])));
  }
  if (!cex.loop_start) {
    if (auto body = invariant_body(f)) {
      StateEvaluator ev(sys, {*body});
      if (ev.eval(0, cex.configs.back().data())) problems.push_back("final configuration satisfies the invariant");
    }
    return problems;
  }
  const std::size_t k = *cex.loop_start, n = cex.configs.size() - 1;
  if (k >= n) {
    problems.push_back("empty cycle");
    return problems;
  }
  if (cex.configs[k] != cex.configs[n]) problems.push_back("cycle does not close");
  for (const auto& o : obs) {
    bool en = false, dis = false, taken = false;
    for (std::size_t i = k; i < n; ++i) {
      (obligation_enabled(sys, cex.configs[i].data(), o) ? en : dis) = true;
      if (obligation_taken(sys, cex.configs[i + 1].data(), o)) taken = true;
    }
    const std::string name = sys.slot_name(o.slot);
    if (o.kind == FairnessObligation::Kind::Justice && !dis && !taken)
      problems.push_back(fmt::format("cycle is unjust to '{}'", name));
    if (o.kind == FairnessObligation::Kind::Compassion && en && !taken)
      problems.push_back(fmt::format("cycle is not compassionate to '{}'", name));
  }
  if (problems.empty() && eval_on_lasso(sys, f, cex)) problems.push_back("the formula holds on the lasso");
  return problems;
}

std::string render(const System& sys, const Counterexample& cex) {
  std::string out;
  nlohmann::json prev;
  for (std::size_t i = 0; i < cex.configs.size(); ++i) {
    if (cex.loop_start && *cex.loop_start == i) out += "  -- cycle starts here --\n";
    nlohmann::json cur = nlohmann::json::parse(sys.to_json(cex.configs[i]));
    if (i == 0) {
      out += "  initial:\n";
      for (auto& [k, v] : cur["state"].items()) out += fmt::format("    {} = {}\n", k, v.dump());
      for (auto& [k, v] : cur["timers"].items()) out += fmt::format("    timer {} = {}\n", k, v["value"].dump());
    } else {
      out += fmt::format("  {:>3}. {}\n", i, sys.render(cex.labels[i - 1]));
      for (auto& [k, v] : cur["state"].items())
        if (prev["state"][k] != v) out += fmt::format("       {} = {}\n", k, v.dump());
      for (auto& [k, v] : cur["timers"].items())
        if (prev["timers"][k] != v)
          out += fmt::format("       timer {} = {}{}\n", k, v["value"].dump(), v["mono"].get<bool>() ? "" : " (not mono)");
    }
    prev = std::move(cur);
  }
  if (cex.loop_start) out += "  -- back to the cycle start --\n";
  return out;
}

}  // namespace ttm::check
