#include "ttm/check/buchi.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace ttm::check {

namespace {

using Set = std::vector<int>;  // sorted formula ids

void add(Set& s, int f) {
  auto it = std::lower_bound(s.begin(), s.end(), f);
  if (it == s.end() || *it != f) s.insert(it, f);
}
bool has(const Set& s, int f) { return std::binary_search(s.begin(), s.end(), f); }

struct Node {
  std::vector<int> incoming;  // -1: initial
  Set fresh, old, next;
};

}  // namespace

Buchi build_buchi(const Ltl& ltl, std::size_t max_states) {
  if (ltl.atoms().size() > 64)
    throw Error(ErrorKind::FormulaTooLarge, fmt::format("formula has {} state atoms (limit 64)", ltl.atoms().size()));

  // Finished nodes, keyed by (old, next).
  std::vector<Node> done;
  std::map<std::pair<Set, Set>, int> index;
  std::vector<Node> stack;
  Node init;
  init.incoming = {-1};
  add(init.fresh, ltl.root());
  stack.push_back(std::move(init));

  auto contradicts = [&](const Set& old, int f) {
    const LtlNode& n = ltl.node(f);
    if (n.kind == LtlKind::False) return true;
    if (n.kind != LtlKind::Atom && n.kind != LtlKind::NotAtom) return false;
    LtlNode dual{n.kind == LtlKind::Atom ? LtlKind::NotAtom : LtlKind::Atom, n.a, -1};
    for (int g : old)
      if (ltl.node(g) == dual) return true;
    return false;
  };

  while (!stack.empty()) {
    Node n = std::move(stack.back());
    stack.pop_back();
    if (n.fresh.empty()) {
      auto key = std::make_pair(n.old, n.next);
      if (auto it = index.find(key); it != index.end()) {
        auto& inc = done[static_cast<std::size_t>(it->second)].incoming;
        for (int i : n.incoming)
          if (std::find(inc.begin(), inc.end(), i) == inc.end()) inc.push_back(i);
        continue;
      }
      if (done.size() >= max_states)
        throw Error(ErrorKind::FormulaTooLarge,
                    fmt::format("Buchi automaton exceeds {} states", max_states));
      int id = static_cast<int>(done.size());
      index.emplace(key, id);
      Node succ;
      succ.incoming = {id};
      succ.fresh = n.next;
      done.push_back(std::move(n));
      stack.push_back(std::move(succ));
      continue;
    }
    int f = n.fresh.front();
    n.fresh.erase(n.fresh.begin());
    if (has(n.old, f)) {
      stack.push_back(std::move(n));
      continue;
    }
    const LtlNode& fn = ltl.node(f);
    switch (fn.kind) {
      case LtlKind::True:
      case LtlKind::False:
      case LtlKind::Atom:
      case LtlKind::NotAtom:
        if (contradicts(n.old, f)) break;
        add(n.old, f);
        stack.push_back(std::move(n));
        break;
      case LtlKind::And:
        add(n.old, f);
        if (!has(n.old, fn.a)) add(n.fresh, fn.a);
        if (!has(n.old, fn.b)) add(n.fresh, fn.b);
        stack.push_back(std::move(n));
        break;
      case LtlKind::Next:
        add(n.old, f);
        add(n.next, fn.a);
        stack.push_back(std::move(n));
        break;
      case LtlKind::Or:
      case LtlKind::Until:
      case LtlKind::Release: {
        add(n.old, f);
        Node n1 = n, n2 = std::move(n);
        if (fn.kind == LtlKind::Or) {
          if (!has(n1.old, fn.a)) add(n1.fresh, fn.a);
          if (!has(n2.old, fn.b)) add(n2.fresh, fn.b);
        } else if (fn.kind == LtlKind::Until) {
          if (!has(n1.old, fn.a)) add(n1.fresh, fn.a);
          add(n1.next, f);
          if (!has(n2.old, fn.b)) add(n2.fresh, fn.b);
        } else {
          if (!has(n1.old, fn.b)) add(n1.fresh, fn.b);
          add(n1.next, f);
          if (!has(n2.old, fn.a)) add(n2.fresh, fn.a);
          if (!has(n2.old, fn.b)) add(n2.fresh, fn.b);
        }
        stack.push_back(std::move(n2));
        stack.push_back(std::move(n1));
        break;
      }
    }
  }

  Buchi b;
  b.states.resize(done.size());
  for (std::size_t q = 0; q < done.size(); ++q) {
    for (int f : done[q].old) {
      const LtlNode& fn = ltl.node(f);
      if (fn.kind == LtlKind::Atom) b.states[q].pos |= std::uint64_t{1} << fn.a;
      if (fn.kind == LtlKind::NotAtom) b.states[q].neg |= std::uint64_t{1} << fn.a;
    }
    for (int i : done[q].incoming) {
      if (i < 0) b.initial.push_back(static_cast<int>(q));
      else b.states[static_cast<std::size_t>(i)].succ.push_back(static_cast<int>(q));
    }
  }
  for (auto& s : b.states) std::sort(s.succ.begin(), s.succ.end());
  std::sort(b.initial.begin(), b.initial.end());
  for (int f = 0; f < ltl.size(); ++f) {
    const LtlNode& fn = ltl.node(f);
    if (fn.kind != LtlKind::Until) continue;
    std::vector<bool> acc(done.size());
    for (std::size_t q = 0; q < done.size(); ++q) acc[q] = !has(done[q].old, f) || has(done[q].old, fn.b);
    b.acceptance.push_back(std::move(acc));
  }
  if (b.acceptance.empty()) b.acceptance.emplace_back(done.size(), true);
  return b;
}

}  // namespace ttm::check
