#include <gtest/gtest.h>

#include "test_util.hpp"
#include "ttm/syntax/lexer.hpp"
#include "ttm/syntax/printer.hpp"

namespace ttm::syntax {
namespace {

TEST(Parser, BundledModelsParse) {
  for (const char* name : {"train_abstract.ttm", "train_abstract_demonic.ttm", "train_refined.ttm", "nop_sync.ttm",
                           "nop_refined.ttm", "philosophers.ttm"}) {
    ParseResult r = parse(test::read_model(name));
    EXPECT_TRUE(r.ok()) << name << ": " << (r.diagnostics.empty() ? "" : r.diagnostics.front().render());
  }
}

TEST(Parser, EventDeclaration) {
  SourceModel m = parse_or_throw(test::single_module(R"(  timers
    t : 0..5;
  events
    e(i : fair 0..1; d : 0..2) [1, *] compassionate when v < 3 && t >= 1 start t do v := v + 1, b :: {false, true} end
    f [2, *] when b do skip end
    g just do if v == 0 then b := true elseif v == 1 then b := false else skip fi end
)"));
  const ModuleDecl* mod = m.find_module("M");
  ASSERT_NE(mod, nullptr);
  ASSERT_EQ(mod->events.size(), 3u);
  const EventDecl& e = mod->events[0];
  EXPECT_EQ(e.name, "e");
  ASSERT_EQ(e.fair_indices.size(), 1u);
  EXPECT_EQ(e.fair_indices[0].name, "i");
  ASSERT_EQ(e.demonic_indices.size(), 1u);
  EXPECT_EQ(e.demonic_indices[0].name, "d");
  EXPECT_TRUE(e.has_bounds);
  EXPECT_EQ(e.lower, Expr::integer(1));
  EXPECT_FALSE(e.upper.has_value());
  EXPECT_EQ(e.fairness, Fairness::Compassionate);
  EXPECT_EQ(e.start, std::vector<std::string>{"t"});
  ASSERT_EQ(e.action.size(), 2u);
  EXPECT_EQ(e.action[0].kind, StmtKind::Assign);
  EXPECT_EQ(e.action[1].kind, StmtKind::Demonic);

  const EventDecl& f = mod->events[1];
  EXPECT_FALSE(f.upper.has_value());
  EXPECT_EQ(f.fairness, Fairness::Spontaneous);

  const EventDecl& g = mod->events[2];
  EXPECT_EQ(g.fairness, Fairness::Just);
  ASSERT_EQ(g.action.size(), 1u);
  EXPECT_EQ(g.action[0].kind, StmtKind::If);
  EXPECT_EQ(g.action[0].conditions.size(), 2u);
  EXPECT_TRUE(g.action[0].has_else());
}

TEST(Parser, FairnessNeedsUnboundedEvent) {
  for (const char* kw : {"just", "compassionate"}) {
    Diagnostic d = test::first_error(
        [&] { parse_or_throw(test::single_module(std::string("  events\n    e [1, 3] ") + kw + " do skip end\n")); });
    EXPECT_EQ(d.kind, ErrorKind::BoundError) << kw;
    EXPECT_EQ(d.loc.line, 11) << kw;
  }
}

TEST(Parser, PrimedNamesAndPrecedence) {
  Expr e = parse_expression("x' + 2 * y == 7 && !b || c");
  ASSERT_EQ(e.kind, ExprKind::Binary);
  EXPECT_EQ(e.op, Op::Or);
  const Expr& conj = e.kids[0];
  EXPECT_EQ(conj.op, Op::And);
  const Expr& eq = conj.kids[0];
  EXPECT_EQ(eq.op, Op::Eq);
  const Expr& sum = eq.kids[0];
  EXPECT_EQ(sum.op, Op::Add);
  EXPECT_TRUE(sum.kids[0].primed);
  EXPECT_EQ(sum.kids[1].op, Op::Mul);
}

TEST(Parser, FormulaOperators) {
  Expr f = parse_formula("[](p => <>(q U r))");
  ASSERT_EQ(f.kind, ExprKind::Temporal);
  EXPECT_EQ(f.op, Op::Always);
  const Expr& imp = f.kids[0];
  EXPECT_EQ(imp.op, Op::Implies);
  EXPECT_EQ(imp.kids[1].op, Op::Eventually);
  EXPECT_EQ(imp.kids[1].kids[0].op, Op::Until);

  Expr q = parse_formula("forall t : TRAIN @ exists u : TRAIN @ move_in(t) or mono(x)");
  EXPECT_EQ(q.kind, ExprKind::Fold);
  EXPECT_EQ(q.op, Op::Forall);
}

TEST(Parser, DiagnosticsCarryPositions) {
  ParseResult r = parse("module M\n  events\n    e when do skip end\nend\n");
  ASSERT_FALSE(r.ok());
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics[0].kind, ErrorKind::SyntaxError);
  EXPECT_EQ(r.diagnostics[0].loc.line, 3);
  EXPECT_GT(r.diagnostics[0].loc.column, 0);
}

TEST(Parser, DuplicateNames) {
  ParseResult r = parse(test::single_module("  events\n    e do skip end\n    e do skip end\n"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].kind, ErrorKind::DuplicateName);
  EXPECT_EQ(r.diagnostics[0].loc.line, 12);
}

TEST(Parser, BoundsAreChecked) {
  ParseResult r = parse(test::single_module("  events\n    e [3, 1] do skip end\n"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].kind, ErrorKind::BoundError);
}

TEST(Parser, ReservedWords) {
  EXPECT_TRUE(is_reserved("module"));
  EXPECT_TRUE(is_reserved("just"));
  EXPECT_FALSE(is_reserved("train"));
}

TEST(Parser, ConstantEvaluation) {
  SourceModel m = parse_or_throw("const N = 3\nconst M = N * 2 + 1\n" + test::single_module("  events\n    e do skip end\n"));
  auto c = m.constants();
  EXPECT_EQ(c.at("N"), 3);
  EXPECT_EQ(c.at("M"), 7);
  EXPECT_EQ(eval_const(parse_expression("(M - 1) / N % 2"), c), 0);
  EXPECT_THROW(eval_const(parse_expression("Q + 1"), c), Error);
}

TEST(Printer, ModelsRoundTrip) {
  for (const char* name : {"train_abstract.ttm", "train_refined.ttm", "nop_sync.ttm", "nop_refined.ttm",
                           "philosophers.ttm"}) {
    SourceModel a = parse_or_throw(test::read_model(name));
    std::string printed = print(a);
    SourceModel b = parse_or_throw(printed);
    EXPECT_EQ(a, b) << name;
    // Printing is a fixed point after one round.
    EXPECT_EQ(print(b), printed) << name;
  }
}

TEST(Printer, MinimalParentheses) {
  EXPECT_EQ(print(parse_expression("(a + b) * c")), "(a + b) * c");
  EXPECT_EQ(print(parse_expression("a + (b * c)")), "a + b * c");
  EXPECT_EQ(print(parse_expression("a - (b - c)")), "a - (b - c)");
  Expr e = parse_formula("[](a => <>b)");
  EXPECT_EQ(parse_formula(print(e)), e);
}

TEST(PropertyFile, NamesParamsAndComments) {
  auto props = parse_property_file(
      "-- sidecar properties\n"
      "\n"
      "safe : [](v <= 3)\n"
      "live(i : 0..1) : [](w[i] => <>b)   -- per index\n");
  ASSERT_EQ(props.size(), 2u);
  EXPECT_EQ(props[0].name, "safe");
  EXPECT_TRUE(props[0].params.empty());
  EXPECT_EQ(props[0].loc.line, 3);
  EXPECT_EQ(props[1].name, "live");
  ASSERT_EQ(props[1].params.size(), 1u);
  EXPECT_EQ(props[1].params[0].name, "i");
  EXPECT_NO_THROW(parse_formula(props[1].text));
}

TEST(PropertyFile, ErrorsReportTheLine) {
  Diagnostic d = test::first_error([] { parse_property_file("ok : []p\n\n: []q\n"); });
  EXPECT_EQ(d.kind, ErrorKind::SyntaxError);
  EXPECT_EQ(d.loc.line, 3);
}

}  // namespace
}  // namespace ttm::syntax
