#include <gtest/gtest.h>

#include <algorithm>

#include "test_util.hpp"

namespace ttm::elab {
namespace {

using test::first_error;
using test::load;

const char* kCircular = R"(variables
  x : 0..3 = 0;
  y : 0..3 = 0;
end

module A
  interface
    x : out 0..3 = 0;
    y : in 0..3;
  events
    a do x := y' end
end

module B
  interface
    y : out 0..3 = 0;
    x : in 0..3;
  depends
    p : A;
  events
    b sync p.a as ab do y := x' end
end

instances
  ia = A(out x, in y);
  ib = B(out y, in x) with p := ia end;
  g ::= ia || ib
end

system = g
)";

TEST(Elaborator, CircularDataFlowAcrossSyncedEvents) {
  Diagnostic d = first_error([] { load(kCircular); });
  EXPECT_EQ(d.kind, ErrorKind::CircularDataFlow);
  EXPECT_EQ(d.loc.line, 21);
  EXPECT_EQ(d.loc.column, 25);
  EXPECT_NE(d.message.find("g.ab"), std::string::npos);
}

TEST(Elaborator, DoubleAssignment) {
  Diagnostic d = first_error([] { load(test::single_module("  events\n    a do v := 1, b := true, v := 2 end\n")); });
  EXPECT_EQ(d.kind, ErrorKind::DoubleAssignment);
  EXPECT_EQ(d.loc.line, 11);
  EXPECT_GT(d.loc.column, 0);
}

TEST(Elaborator, CyclicModuleDependency) {
  Diagnostic d = first_error([] {
    load(R"(variables
  x : 0..3 = 0;
end

module A
  interface
    x : out 0..3 = 0;
  depends
    q : B;
  events
    a do x := 1 end
end

module B
  depends
    p : A;
  events
    b do skip end
end

instances
  ia = A(out x) with q := ib end;
  ib = B() with p := ia end
end

system = ia || ib
)");
  });
  EXPECT_EQ(d.kind, ErrorKind::CyclicModuleDependency);
  EXPECT_EQ(d.loc.line, 9);
  EXPECT_EQ(d.loc.column, 5);
  EXPECT_NE(d.message.find("A -> B -> A"), std::string::npos);
}

TEST(Elaborator, PrimedSelfReference) {
  Diagnostic d = first_error([] { load(test::single_module("  events\n    a do v := v' end\n")); });
  EXPECT_EQ(d.kind, ErrorKind::CircularDataFlow);
}

TEST(Elaborator, SyncMergesGuardsActionsAndBounds) {
  test::Loaded l = load(R"(variables
  x : 0..3 = 0;
  y : 0..3 = 0;
end

module A
  interface
    x : out 0..3 = 0;
  events
    a [1, 4] when x < 3 do x := x + 1 end
end

module B
  interface
    y : out 0..3 = 0;
    x : in 0..3;
  depends
    p : A;
  events
    b [2, 5] sync p.a as ab when y < 3 do y := x' end
end

instances
  ia = A(out x);
  ib = B(out y, in x) with p := ia end;
  g ::= ia || ib
end

system = g
)");
  const FlatEvent* ab = l.flat.find_event("g.ab");
  ASSERT_NE(ab, nullptr);
  EXPECT_TRUE(ab->compound());
  EXPECT_EQ(ab->l, 2);
  ASSERT_TRUE(ab->u.has_value());
  EXPECT_EQ(*ab->u, 4);
  EXPECT_EQ(ab->fair, syntax::Fairness::Spontaneous);
  // y := x' runs after x := x + 1.
  ASSERT_EQ(ab->action.size(), 2u);
  EXPECT_EQ(ab->action[0].var, "x");
  EXPECT_EQ(ab->action[1].var, "y");
  EXPECT_EQ(ab->action_edges, (std::vector<std::pair<std::string, std::string>>{{"x", "y"}}));
  // The synchronized member no longer exists on its own.
  EXPECT_EQ(l.flat.find_event("ia.a"), nullptr);
}

TEST(Elaborator, EmptyMergedBound) {
  Diagnostic d = first_error([] {
    load(R"(variables
  x : 0..3 = 0;
end

module A
  interface
    x : out 0..3 = 0;
  events
    a [0, 1] do x := 1 end
end

module B
  depends
    p : A;
  events
    b [2, 3] sync p.a as ab do skip end
end

instances
  ia = A(out x);
  ib = B() with p := ia end;
  g ::= ia || ib
end

system = g
)");
  });
  EXPECT_EQ(d.kind, ErrorKind::MergedBoundEmpty);
}

TEST(Elaborator, StrictActionEdges) {
  const std::string swap = test::single_module("  local\n    w : 0..3 = 0;\n  events\n    a do v := w, w := v end\n");
  EXPECT_NO_THROW(load(swap));
  ElabOptions strict;
  strict.strict_action_edges = true;
  Diagnostic d = first_error([&] { load(swap, strict); });
  EXPECT_EQ(d.kind, ErrorKind::CircularDataFlow);
}

TEST(Elaborator, TimersAndLocalsArePrefixed) {
  test::Loaded l = load(test::single_module("  local\n    w : 0..3 = 2;\n  timers\n    t : 0..5;\n  events\n"
                                            "    a start t do w := 0 end\n"));
  const FlatVar* w = l.flat.find_var("m.w");
  ASSERT_NE(w, nullptr);
  EXPECT_TRUE(w->local);
  EXPECT_EQ(w->init, std::vector<std::int64_t>{2});
  const FlatTimer* t = l.flat.find_timer("m.t");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->bound, 5);
  EXPECT_EQ(t->init, 0);
  EXPECT_NE(l.flat.find_event("m.a"), nullptr);
}

TEST(Elaborator, TablesAreSorted) {
  test::Loaded l = test::load_file("train_refined.ttm");
  auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
  EXPECT_TRUE(std::is_sorted(l.flat.vars.begin(), l.flat.vars.end(), by_name));
  EXPECT_TRUE(std::is_sorted(l.flat.events.begin(), l.flat.events.end(),
                             [](const FlatEvent& a, const FlatEvent& b) { return a.id < b.id; }));
}

TEST(Elaborator, ModelHashIsStable) {
  test::Loaded a = test::load_file("nop_sync.ttm");
  test::Loaded b = test::load_file("nop_sync.ttm");
  EXPECT_EQ(model_hash(a.flat), model_hash(b.flat));
  EXPECT_EQ(dump_json(a.flat), dump_json(b.flat));
  test::Loaded c = test::load_file("nop_refined.ttm");
  EXPECT_NE(model_hash(a.flat), model_hash(c.flat));
}

TEST(Elaborator, UnknownSyncTarget) {
  Diagnostic d = first_error([] {
    load(test::single_module("  events\n    a sync m.nothing as z do skip end\n"));
  });
  EXPECT_TRUE(d.kind == ErrorKind::SyncTargetNotFound || d.kind == ErrorKind::UnknownReference ||
              d.kind == ErrorKind::UnknownDependency)
      << d.render();
}

TEST(Elaborator, IteratedComposition) {
  test::Loaded l = load(R"(variables
  w : array[0..2] of bool = false;
end

module CELL
  interface
    c : out bool = false;
  events
    set when !c do c := true end
end

system = || i : 0..2 @ CELL(out w[i])
)");
  ASSERT_EQ(l.flat.events.size(), 3u);
  EXPECT_EQ(l.flat.events[0].id, "CELL_0.set");
  EXPECT_EQ(l.flat.events[2].id, "CELL_2.set");
  ASSERT_EQ(l.flat.events[1].action.size(), 1u);
  EXPECT_EQ(l.flat.events[1].action[0].var, "w");
  ASSERT_TRUE(l.flat.events[1].action[0].writes[0].index.has_value());
  EXPECT_EQ(*l.flat.events[1].action[0].writes[0].index, syntax::Expr::integer(1));
}

}  // namespace
}  // namespace ttm::elab
