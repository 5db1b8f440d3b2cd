#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>

#include "suite.hpp"
#include "test_util.hpp"
#include "ttm/check/buchi.hpp"
#include "ttm/check/checker.hpp"
#include "ttm/check/formula.hpp"
#include "ttm/syntax/printer.hpp"

namespace ttm::check {
namespace {

// Does the automaton accept the lasso word configs[0..ls) (configs[ls..n))^w?
// Product of lasso positions and automaton states; accepting iff some
// nontrivial SCC inside the cycle part meets every acceptance set.
bool accepts(const Buchi& a, const std::vector<std::uint64_t>& letters, std::size_t ls) {
  const std::size_t n = letters.size(), q = a.states.size(), total = n * q;
  auto id = [&](std::size_t pos, std::size_t s) { return pos * q + s; };
  std::vector<std::vector<std::size_t>> succ(total), pred(total);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t next = pos + 1 == n ? ls : pos + 1;
    for (std::size_t s = 0; s < q; ++s) {
      if (!a.states[s].accepts(letters[pos])) continue;
      for (int t : a.states[s].succ)
        if (a.states[static_cast<std::size_t>(t)].accepts(letters[next])) {
          succ[id(pos, s)].push_back(id(next, static_cast<std::size_t>(t)));
          pred[id(next, static_cast<std::size_t>(t))].push_back(id(pos, s));
        }
    }
  }
  std::vector<bool> reach(total, false);
  std::vector<std::size_t> stack;
  for (int s : a.initial)
    if (a.states[static_cast<std::size_t>(s)].accepts(letters[0])) {
      reach[id(0, static_cast<std::size_t>(s))] = true;
      stack.push_back(id(0, static_cast<std::size_t>(s)));
    }
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : succ[v])
      if (!reach[w]) reach[w] = true, stack.push_back(w);
  }
  // Kosaraju over the reachable part.
  std::vector<std::size_t> order;
  std::vector<bool> seen(total, false);
  std::function<void(std::size_t)> dfs1 = [&](std::size_t v) {
    seen[v] = true;
    for (std::size_t w : succ[v])
      if (reach[w] && !seen[w]) dfs1(w);
    order.push_back(v);
  };
  for (std::size_t v = 0; v < total; ++v)
    if (reach[v] && !seen[v]) dfs1(v);
  std::vector<int> comp(total, -1);
  int ncomp = 0;
  std::function<void(std::size_t)> dfs2 = [&](std::size_t v) {
    comp[v] = ncomp;
    for (std::size_t w : pred[v])
      if (reach[w] && comp[w] < 0) dfs2(w);
  };
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (comp[*it] < 0) dfs2(*it), ++ncomp;
  for (int c = 0; c < ncomp; ++c) {
    bool nontrivial = false;
    std::vector<bool> hit(a.acceptance.size(), false);
    for (std::size_t v = 0; v < total; ++v) {
      if (comp[v] != c) continue;
      for (std::size_t w : succ[v]) nontrivial = nontrivial || comp[w] == c;
      for (std::size_t k = 0; k < a.acceptance.size(); ++k) hit[k] = hit[k] || a.acceptance[k][v % q];
    }
    if (nontrivial && std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) return true;
  }
  return false;
}

std::string random_formula(std::mt19937_64& rng, int depth) {
  static const char* atoms[] = {"v = 0", "v < 2", "v = 3", "b", "inc", "reset", "flip"};
  if (depth == 0 || rng() % 4 == 0) return atoms[rng() % std::size(atoms)];
  std::string a = random_formula(rng, depth - 1);
  switch (rng() % 7) {
    case 0: return "!(" + a + ")";
    case 1: return "[](" + a + ")";
    case 2: return "<>(" + a + ")";
    case 3: return "(" + a + ") and (" + random_formula(rng, depth - 1) + ")";
    case 4: return "(" + a + ") or (" + random_formula(rng, depth - 1) + ")";
    case 5: return "(" + a + ") => (" + random_formula(rng, depth - 1) + ")";
    default: return "(" + a + ") U (" + random_formula(rng, depth - 1) + ")";
  }
}

// A lasso from a random walk that stops at the first repeated configuration.
Counterexample random_lasso(const lts::System& s, std::mt19937_64& rng) {
  Counterexample cx;
  std::map<lts::Configuration, std::size_t> seen;
  cx.configs.push_back(s.initial());
  seen[s.initial()] = 0;
  for (;;) {
    std::vector<lts::Successor> succ;
    s.successors(cx.configs.back().data(), succ);
    const auto& pick = succ[rng() % succ.size()];
    cx.labels.push_back(pick.name);
    cx.configs.push_back(pick.config);
    if (auto it = seen.find(pick.config); it != seen.end()) {
      cx.loop_start = it->second;
      return cx;
    }
    seen[pick.config] = cx.configs.size() - 1;
  }
}

// Both the automaton of f and that of !f agree with direct evaluation of f
// on random lassos of the suite models.
TEST(Buchi, AgreesWithLassoEvaluation) {
  std::mt19937_64 rng(99);
  int checked = 0, held = 0;
  for (const auto& sm : oracle::suite_models()) {
    test::Loaded l = test::load(sm.source);
    const lts::System& s = *l.sys;
    for (int round = 0; round < 25; ++round) {
      syntax::Expr f = expand_quantifiers(syntax::parse_formula(random_formula(rng, 3)), l.flat);
      Ltl pos = Ltl::from(f, false), neg = Ltl::from(f, true);
      Buchi bp = build_buchi(pos), bn = build_buchi(neg);
      StateEvaluator ep(s, pos.atoms()), en(s, neg.atoms());
      for (int k = 0; k < 4; ++k) {
        Counterexample cx = random_lasso(s, rng);
        std::vector<std::uint64_t> lp, ln;
        // The last configuration repeats the loop start; drop it.
        for (std::size_t i = 0; i + 1 < cx.configs.size(); ++i) {
          lp.push_back(ep.mask(cx.configs[i].data()));
          ln.push_back(en.mask(cx.configs[i].data()));
        }
        const bool truth = eval_on_lasso(s, f, cx);
        ASSERT_EQ(accepts(bp, lp, *cx.loop_start), truth) << sm.name << ": " << syntax::print(f);
        ASSERT_EQ(accepts(bn, ln, *cx.loop_start), !truth) << sm.name << ": " << syntax::print(f);
        ++checked;
        held += truth;
      }
    }
  }
  EXPECT_EQ(checked, 1000);
  // Both outcomes are exercised.
  EXPECT_GT(held, 100);
  EXPECT_LT(held, 900);
}

TEST(Buchi, ShapeOfSimpleAutomata) {
  // <>p: one acceptance set; []p: no pending eventualities.
  Ltl ev = Ltl::from(syntax::parse_formula("<>p"), false);
  Buchi a = build_buchi(ev);
  EXPECT_EQ(a.acceptance.size(), 1u);
  EXPECT_FALSE(a.initial.empty());

  Ltl al = Ltl::from(syntax::parse_formula("[]p"), false);
  Buchi b = build_buchi(al);
  EXPECT_TRUE(b.acceptance.empty() || std::all_of(b.acceptance[0].begin(), b.acceptance[0].end(), [](bool x) { return x; }));
  for (const auto& s : b.states) EXPECT_EQ(s.pos, 1u);
}

TEST(Buchi, TooLarge) {
  std::string f = "p0";
  for (int i = 1; i < 12; ++i) f = "(" + f + ") U (<>p" + std::to_string(i) + ")";
  Diagnostic d = test::first_error([&] { build_buchi(Ltl::from(syntax::parse_formula(f), true), 64); });
  EXPECT_EQ(d.kind, ErrorKind::FormulaTooLarge);
}

}  // namespace
}  // namespace ttm::check
