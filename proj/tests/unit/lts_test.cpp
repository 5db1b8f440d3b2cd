#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"

namespace ttm::lts {
namespace {

using test::load;
using test::single_module;
using K = TransitionName::Kind;

Value var(const System& s, const Configuration& c, const std::string& name) {
  const auto& vars = s.model().vars;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name) return c[static_cast<std::size_t>(s.var_offset(static_cast<int>(i)))];
  ADD_FAILURE() << "no variable " << name;
  return 0;
}

int event_index(const System& s, const std::string& id) {
  const auto& ev = s.model().events;
  for (std::size_t i = 0; i < ev.size(); ++i)
    if (ev[i].id == id) return static_cast<int>(i);
  ADD_FAILURE() << "no event " << id;
  return -1;
}

Value clock(const System& s, const Configuration& c, const std::string& id, int fair = 0) {
  return c[static_cast<std::size_t>(s.clock_offset(s.first_slot(event_index(s, id)) + fair))];
}

bool has(const std::vector<TransitionName>& ts, const TransitionName& t) {
  return std::find(ts.begin(), ts.end(), t) != ts.end();
}

Configuration only(const System& s, const Configuration& c, const TransitionName& t) {
  auto succ = s.step(c, t);
  EXPECT_EQ(succ.size(), 1u);
  return succ.front().config;
}

// e# followed by e (first demonic valuation).
Configuration occur(const System& s, const Configuration& c, int slot) {
  return only(s, only(s, c, TransitionName::hash(slot)), TransitionName::event(slot, 0));
}

TEST(System, InitialConfiguration) {
  test::Loaded l = load(single_module(R"(  local
    w : 0..3 = 2;
  timers
    t : 0..5;
  events
    a when v == 0 do v := 1 end
    c when v == 1 do v := 2 end
)"));
  const System& s = *l.sys;
  Configuration c = s.initial();
  EXPECT_EQ(static_cast<int>(c.size()), s.width());
  EXPECT_EQ(var(s, c, "m.w"), 2);
  EXPECT_EQ(var(s, c, "v"), 0);
  EXPECT_EQ(c[static_cast<std::size_t>(s.timer_offset(0))], 0);
  EXPECT_EQ(c[static_cast<std::size_t>(s.mono_offset(0))], 1);
  EXPECT_EQ(clock(s, c, "m.a"), 0);
  EXPECT_EQ(clock(s, c, "m.c"), -1);
  EXPECT_EQ(c[static_cast<std::size_t>(s.x_offset())], -1);
  EXPECT_EQ(c[static_cast<std::size_t>(s.p_offset())], -1);
  EXPECT_FALSE(s.has_last(c.data()));
  EXPECT_EQ(s.violated_invariant(c.data()), "");
}

TEST(System, HashThenEventThenClockTable) {
  test::Loaded l = load(single_module(R"(  events
    a [0, 9] when v < 2 do v := v + 1 end
    c [0, 9] when v >= 1 do b := !b end
)"));
  const System& s = *l.sys;
  const int a = s.first_slot(event_index(s, "m.a"));
  const int c_slot = s.first_slot(event_index(s, "m.c"));
  Configuration c0 = s.initial();
  auto en = s.enabled(c0);
  EXPECT_TRUE(has(en, TransitionName::hash(a)));
  EXPECT_FALSE(has(en, TransitionName::hash(c_slot)));
  EXPECT_TRUE(has(en, TransitionName::tick()));

  Configuration c1 = only(s, c0, TransitionName::tick());
  EXPECT_EQ(clock(s, c1, "m.a"), 1);
  EXPECT_EQ(clock(s, c1, "m.c"), -1);

  // e# leaves state and clocks alone; only e is enabled afterwards.
  Configuration h = only(s, c1, TransitionName::hash(a));
  EXPECT_EQ(var(s, h, "v"), 0);
  EXPECT_EQ(clock(s, h, "m.a"), 1);
  EXPECT_EQ(h[static_cast<std::size_t>(s.x_offset())], a);
  EXPECT_EQ(s.enabled(h), std::vector<TransitionName>{TransitionName::event(a, 0)});
  EXPECT_EQ(s.last(h.data()), TransitionName::hash(a));

  Configuration c2 = only(s, h, TransitionName::event(a, 0));
  EXPECT_EQ(var(s, c2, "v"), 1);
  EXPECT_EQ(clock(s, c2, "m.a"), 0);  // taken event restarts its clock
  EXPECT_EQ(clock(s, c2, "m.c"), 0);  // guard newly true
  EXPECT_EQ(s.last(c2.data()), TransitionName::event(a, 0));

  Configuration c3 = only(s, only(s, c2, TransitionName::tick()), TransitionName::tick());
  EXPECT_EQ(clock(s, c3, "m.c"), 2);
  // c stays enabled across a, so its clock survives.
  Configuration c4 = occur(s, c3, a);
  EXPECT_EQ(var(s, c4, "v"), 2);
  EXPECT_EQ(clock(s, c4, "m.c"), 2);
  EXPECT_EQ(clock(s, c4, "m.a"), -1);  // guard now false
  EXPECT_THROW(s.step(c4, TransitionName::hash(a)), Error);
}

TEST(System, LowerAndUpperBounds) {
  test::Loaded l = load(single_module("  events\n    a [2, 3] when v == 0 do v := 1 end\n"));
  const System& s = *l.sys;
  const int a = s.first_slot(0);
  Configuration c = s.initial();
  for (int k = 0; k < 2; ++k) {
    EXPECT_FALSE(has(s.enabled(c), TransitionName::hash(a))) << k;
    c = only(s, c, TransitionName::tick());
  }
  EXPECT_TRUE(has(s.enabled(c), TransitionName::hash(a)));
  c = only(s, c, TransitionName::tick());
  EXPECT_EQ(clock(s, c, "m.a"), 3);
  // Urgent: the clock reached u, so time cannot pass.
  EXPECT_EQ(s.enabled(c), std::vector<TransitionName>{TransitionName::hash(a)});
  EXPECT_THROW(s.step(c, TransitionName::tick()), Error);
}

TEST(System, UnboundedClockStaysAtLowerBound) {
  test::Loaded l = load(single_module("  events\n    a [2, *] when v == 0 do v := 1 end\n"));
  const System& s = *l.sys;
  Configuration c = s.initial();
  for (int k = 0; k < 5; ++k) c = only(s, c, TransitionName::tick());
  EXPECT_EQ(clock(s, c, "m.a"), 2);
}

TEST(System, TimersSaturateAndStop) {
  test::Loaded l = load(single_module(R"(  timers
    t : 0..2;
  events
    go when v == 0 start t do v := 1 end
    halt when v == 1 stop t do v := 2 end
)"));
  const System& s = *l.sys;
  auto timer = [&](const Configuration& c) { return c[static_cast<std::size_t>(s.timer_offset(0))]; };
  auto mono = [&](const Configuration& c) { return c[static_cast<std::size_t>(s.mono_offset(0))]; };
  Configuration c = s.initial();
  for (int k = 0; k < 5; ++k) c = only(s, c, TransitionName::tick());
  EXPECT_EQ(timer(c), 3);  // bound + 1

  const int go = s.first_slot(event_index(s, "m.go"));
  Configuration h = only(s, c, TransitionName::hash(go));
  EXPECT_EQ(mono(h), 0);
  EXPECT_EQ(timer(h), 3);
  c = only(s, h, TransitionName::event(go, 0));
  EXPECT_EQ(mono(c), 1);
  EXPECT_EQ(timer(c), 0);
  c = only(s, c, TransitionName::tick());
  EXPECT_EQ(timer(c), 1);

  const int halt = s.first_slot(event_index(s, "m.halt"));
  c = occur(s, c, halt);
  EXPECT_EQ(mono(c), 0);
  for (int k = 0; k < 3; ++k) c = only(s, c, TransitionName::tick());
  EXPECT_EQ(timer(c), 1);  // frozen
  EXPECT_EQ(mono(c), 0);
}

TEST(System, DemonicAssignmentAndIndices) {
  test::Loaded l = load(single_module(R"(  events
    pick do v :: 1..3 end
    put(d : 0..1) when v == 0 do b := d == 1 end
)"));
  const System& s = *l.sys;
  const int pick = s.first_slot(event_index(s, "m.pick"));
  auto succ = s.step(only(s, s.initial(), TransitionName::hash(pick)), TransitionName::event(pick, 0));
  ASSERT_EQ(succ.size(), 3u);
  std::vector<Value> vs;
  for (const auto& x : succ) vs.push_back(var(s, x.config, "v"));
  std::sort(vs.begin(), vs.end());
  EXPECT_EQ(vs, (std::vector<Value>{1, 2, 3}));

  const int put_ev = event_index(s, "m.put");
  EXPECT_EQ(s.fair_count(put_ev), 1);
  EXPECT_EQ(s.demonic_count(put_ev), 2);
  const int put = s.first_slot(put_ev);
  Configuration h = only(s, s.initial(), TransitionName::hash(put));
  auto en = s.enabled(h);
  EXPECT_EQ(en.size(), 2u);
  EXPECT_EQ(var(s, only(s, h, TransitionName::event(put, 1)), "b"), 1);
  EXPECT_EQ(var(s, only(s, h, TransitionName::event(put, 0)), "b"), 0);
}

TEST(System, FairIndicesGetSeparateClocks) {
  test::Loaded l = load(single_module(R"(  local
    w : array[0..1] of bool = false;
  events
    set(i : fair 0..1) [0, 9] when !w[i] do w[i] := true end
)"));
  const System& s = *l.sys;
  const int ev = event_index(s, "m.set");
  EXPECT_EQ(s.fair_count(ev), 2);
  EXPECT_EQ(s.find_slot(ev, {1}), s.first_slot(ev) + 1);
  EXPECT_EQ(s.find_slot(ev, {7}), -1);
  Configuration c = occur(s, only(s, s.initial(), TransitionName::tick()), s.find_slot(ev, {0}));
  EXPECT_EQ(clock(s, c, "m.set", 0), -1);
  EXPECT_EQ(clock(s, c, "m.set", 1), 1);
  EXPECT_EQ(s.slot_name(s.find_slot(ev, {1})), "m.set(1)");
}

TEST(System, RuntimeDoubleAssignmentOnElements) {
  test::Loaded l = load(single_module(R"(  local
    w : array[0..1] of bool = false;
  events
    set(i : fair 0..1; j : 0..1) do w[i] := true, w[j] := false end
)"));
  const System& s = *l.sys;
  const int ev = event_index(s, "m.set");
  const int slot = s.find_slot(ev, {0});
  Configuration h = only(s, s.initial(), TransitionName::hash(slot));
  EXPECT_NO_THROW(s.step(h, TransitionName::event(slot, s.find_demonic(ev, {1}))));
  Diagnostic d = test::first_error([&] { s.step(h, TransitionName::event(slot, s.find_demonic(ev, {0}))); });
  EXPECT_EQ(d.kind, ErrorKind::DoubleAssignment);
}

TEST(System, PrimedReadsSeeNewValues) {
  test::Loaded l = load(single_module(R"(  local
    w : 0..3 = 0;
  events
    a when v == 0 do w := v' + 1, v := 2 end
)"));
  const System& s = *l.sys;
  Configuration c = occur(s, s.initial(), 0);
  EXPECT_EQ(var(s, c, "v"), 2);
  EXPECT_EQ(var(s, c, "m.w"), 3);
}

TEST(System, EvaluationErrors) {
  test::Loaded l = load(single_module(R"(  local
    q : queue[0..3](1);
  events
    a do v := q.First() end
)"));
  const System& s = *l.sys;
  Diagnostic d = test::first_error([&] { occur(s, s.initial(), 0); });
  EXPECT_EQ(d.kind, ErrorKind::EvaluationError);
}

TEST(System, RenderAndParseTransitions) {
  test::Loaded l = test::load_file("train_abstract_demonic.ttm");
  const System& s = *l.sys;
  Configuration c = s.initial();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    auto en = s.enabled(c);
    ASSERT_FALSE(en.empty());
    for (const auto& t : en) {
      auto parsed = s.parse_transition(s.render(t));
      ASSERT_TRUE(parsed.has_value()) << s.render(t);
      EXPECT_EQ(*parsed, t) << s.render(t);
    }
    auto succ = s.step(c, en[rng() % en.size()]);
    c = succ[rng() % succ.size()].config;
  }
  EXPECT_FALSE(s.parse_transition("no_such_event#").has_value());
  EXPECT_EQ(s.parse_transition("  tick "), TransitionName::tick());
}

TEST(System, DigestAndJson) {
  test::Loaded l = test::load_file("train_abstract.ttm");
  const System& s = *l.sys;
  Configuration c0 = s.initial();
  Configuration c1 = only(s, c0, TransitionName::tick());
  EXPECT_EQ(s.digest(c0), s.digest(s.initial()));
  EXPECT_NE(s.digest(c0), s.digest(c1));
  EXPECT_EQ(s.to_json(c0), s.to_json(s.initial()));
  EXPECT_NE(s.to_json(c0).find("\"loc\""), std::string::npos);
  EXPECT_NE(s.to_json(c0).find("Out"), std::string::npos);
}

// Configuration invariants hold along random walks of every bundled model,
// and successor lists agree with enabled().
TEST(System, RandomWalkInvariants) {
  for (const char* name : {"train_abstract.ttm", "train_abstract_demonic.ttm", "train_refined.ttm", "nop_sync.ttm",
                           "nop_refined.ttm", "philosophers.ttm"}) {
    test::Loaded l = test::load_file(name);
    const System& s = *l.sys;
    std::mt19937_64 rng(1234);
    for (int walk = 0; walk < 5; ++walk) {
      Configuration c = s.initial();
      for (int k = 0; k < 400; ++k) {
        ASSERT_EQ(s.violated_invariant(c.data()), "") << name;
        auto en = s.enabled(c);
        if (en.empty()) break;
        std::vector<Successor> all;
        s.successors(c.data(), all);
        std::size_t expected = 0;
        for (const auto& t : en) expected += s.step(c, t).size();
        ASSERT_EQ(all.size(), expected) << name;
        const auto& pick = all[rng() % all.size()];
        if (pick.name.kind == K::Event) {
          ASSERT_EQ(s.last(pick.config.data()), pick.name);
        }
        c = pick.config;
      }
    }
  }
}

}  // namespace
}  // namespace ttm::lts
