#include "ttm/elab/flat_model.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "ttm/hash.hpp"
#include "ttm/syntax/printer.hpp"

namespace ttm::elab {

using syntax::Expr;
using syntax::ExprKind;
using syntax::Op;

namespace {
template <typename T>
const T* find_sorted(const std::vector<T>& xs, std::string_view name, std::string T::*key) {
  auto it = std::lower_bound(xs.begin(), xs.end(), name,
                             [&](const T& x, std::string_view n) { return x.*key < n; });
  return it != xs.end() && (*it).*key == name ? &*it : nullptr;
}
}  // namespace

const FlatVar* FlatModel::find_var(std::string_view name) const { return find_sorted(vars, name, &FlatVar::name); }
const FlatTimer* FlatModel::find_timer(std::string_view name) const {
  return find_sorted(timers, name, &FlatTimer::name);
}
const FlatEvent* FlatModel::find_event(std::string_view name) const {
  return find_sorted(events, name, &FlatEvent::id);
}
const FlatPredicate* FlatModel::find_predicate(std::string_view name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

std::optional<std::int64_t> FlatModel::try_const(const Expr& e) const {
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
      return e.value;
    case ExprKind::Name: {
      if (e.primed) return std::nullopt;
      if (auto it = constants.find(e.name); it != constants.end()) return it->second;
      if (find_var(e.name) || find_timer(e.name)) return std::nullopt;
      return symbols.find(e.name);
    }
    case ExprKind::Unary: {
      auto a = try_const(e.kids[0]);
      if (!a) return std::nullopt;
      return e.op == Op::Not ? std::int64_t(!*a) : -*a;
    }
    case ExprKind::Binary: {
      auto a = try_const(e.kids[0]);
      auto b = try_const(e.kids[1]);
      if (!a || !b) return std::nullopt;
      switch (e.op) {
        case Op::Add: return *a + *b;
        case Op::Sub: return *a - *b;
        case Op::Mul: return *a * *b;
        case Op::Div: return *b ? std::optional(*a / *b) : std::nullopt;
        case Op::Mod: return *b ? std::optional(*a % *b) : std::nullopt;
        case Op::Eq: return *a == *b;
        case Op::Ne: return *a != *b;
        case Op::Lt: return *a < *b;
        case Op::Le: return *a <= *b;
        case Op::Gt: return *a > *b;
        case Op::Ge: return *a >= *b;
        case Op::And: return *a && *b;
        case Op::Or: return *a || *b;
        case Op::Implies: return !*a || *b;
        default: return std::nullopt;
      }
    }
    default:
      return std::nullopt;
  }
}

Domain FlatModel::eval_set(const Expr& e) const {
  switch (e.kind) {
    case ExprKind::Name:
      if (auto it = sets.find(e.name); it != sets.end() && !e.primed) return it->second;
      break;
    case ExprKind::Range: {
      auto lo = try_const(e.kids[0]);
      auto hi = try_const(e.kids[1]);
      if (lo && hi) return Domain::range(*lo, *hi);
      break;
    }
    case ExprKind::SetLit: {
      Domain d;
      bool any_symbol = false, any_int = false;
      for (const auto& k : e.kids) {
        auto v = try_const(k);
        if (!v) throw Error(ErrorKind::UnknownSet, fmt::format("set element '{}' is not constant", syntax::print(k)), k.loc);
        bool sym = k.kind == ExprKind::Name && !constants.count(k.name);
        (sym ? any_symbol : any_int) = true;
        if (!d.contains(*v)) d.values.push_back(*v);
      }
      if (any_symbol && any_int)
        throw Error(ErrorKind::TypeError, "set mixes symbols and integers", e.loc);
      bool all_bool = !e.kids.empty() && std::all_of(e.kids.begin(), e.kids.end(), [](const Expr& k) {
        return k.kind == ExprKind::BoolLit;
      });
      d.kind = any_symbol ? ScalarKind::Symbol : all_bool ? ScalarKind::Bool : ScalarKind::Int;
      return d;
    }
    default:
      break;
  }
  throw Error(ErrorKind::UnknownSet, fmt::format("'{}' does not denote a finite set", syntax::print(e)), e.loc);
}

std::string FlatModel::render(const Domain& d, std::int64_t v) const {
  switch (d.kind) {
    case ScalarKind::Bool: return v ? "true" : "false";
    case ScalarKind::Symbol:
      if (v >= 0 && static_cast<std::size_t>(v) < symbols.names().size()) return symbols.name(v);
      return fmt::format("#{}", v);
    case ScalarKind::Int: break;
  }
  return std::to_string(v);
}

namespace {

nlohmann::json domain_json(const FlatModel& m, const Domain& d) {
  nlohmann::json a = nlohmann::json::array();
  for (auto v : d.values) {
    if (d.kind == ScalarKind::Int) a.push_back(v);
    else a.push_back(m.render(d, v));
  }
  return a;
}

nlohmann::json type_json(const FlatModel& m, const Type& t) {
  nlohmann::json j;
  switch (t.kind) {
    case Type::Kind::Scalar:
      j["kind"] = "scalar";
      j["values"] = domain_json(m, t.element);
      break;
    case Type::Kind::Array:
      j["kind"] = "array";
      j["index"] = domain_json(m, t.index);
      j["values"] = domain_json(m, t.element);
      break;
    case Type::Kind::Queue:
      j["kind"] = "queue";
      j["capacity"] = t.capacity;
      j["values"] = domain_json(m, t.element);
      break;
  }
  return j;
}

nlohmann::json graph_json(const Graph& g) {
  nlohmann::json j;
  j["nodes"] = g.nodes;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  j["edges"] = edges;
  return j;
}

nlohmann::json indices_json(const FlatModel& m, const std::vector<FlatIndex>& xs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : xs) a.push_back({{"name", x.name}, {"values", domain_json(m, x.domain)}});
  return a;
}

}  // namespace

std::string dump_json(const FlatModel& m, int indent) {
  nlohmann::json j;
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : m.vars) {
    nlohmann::json init = nlohmann::json::array();
    for (auto x : v.init) init.push_back(x);
    vars.push_back({{"name", v.name},
                    {"type", type_json(m, v.type)},
                    {"mode", std::string(to_string(v.mode))},
                    {"local", v.local},
                    {"init", init}});
  }
  j["variables"] = vars;
  nlohmann::json timers = nlohmann::json::array();
  for (const auto& t : m.timers) timers.push_back({{"name", t.name}, {"bound", t.bound}, {"init", t.init}});
  j["timers"] = timers;
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : m.events) {
    nlohmann::json ev;
    ev["id"] = e.id;
    ev["f_ind"] = indices_json(m, e.f_ind);
    ev["d_ind"] = indices_json(m, e.d_ind);
    ev["l"] = e.l;
    ev["u"] = e.u ? nlohmann::json(*e.u) : nlohmann::json(nullptr);
    ev["fair"] = std::string(to_string(e.fair));
    ev["guard"] = syntax::print(e.guard);
    ev["start"] = e.start;
    ev["stop"] = e.stop;
    ev["members"] = e.members;
    nlohmann::json action = nlohmann::json::array();
    for (const auto& p : e.action) {
      nlohmann::json writes = nlohmann::json::array();
      for (const auto& w : p.writes) {
        nlohmann::json wj;
        wj["condition"] = syntax::print(w.condition);
        wj["index"] = w.index ? nlohmann::json(syntax::print(*w.index)) : nlohmann::json(nullptr);
        wj["demonic"] = w.demonic;
        wj["value"] = syntax::print(w.value);
        writes.push_back(wj);
      }
      action.push_back({{"var", p.var}, {"writes", writes}});
    }
    ev["action"] = action;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : e.action_edges) edges.push_back({a, b});
    ev["action_graph"] = edges;
    events.push_back(ev);
  }
  j["events"] = events;
  j["constants"] = m.constants;
  nlohmann::json sets = nlohmann::json::object();
  for (const auto& [name, d] : m.sets) sets[name] = domain_json(m, d);
  j["sets"] = sets;
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : m.predicates) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [n, d] : p.params) params.push_back({{"name", n}, {"values", domain_json(m, d)}});
    preds.push_back({{"name", p.name}, {"params", params}, {"body", syntax::print(p.body)}});
  }
  j["predicates"] = preds;
  j["graphs"] = {{"module", graph_json(m.module_graph)}, {"event", graph_json(m.event_graph)}};
  nlohmann::json syncs = nlohmann::json::array();
  for (const auto& s : m.sync_sets)
    syncs.push_back({{"members", s.members}, {"compound", s.compound_name}, {"module_component", s.module_component}});
  j["sync_sets"] = syncs;
  return j.dump(indent);
}

std::uint64_t model_hash(const FlatModel& m) {
  return fnv1a64(dump_json(m, -1));
}

}  // namespace ttm::elab
