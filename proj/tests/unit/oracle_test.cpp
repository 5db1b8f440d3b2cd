#include <gtest/gtest.h>

#include <random>

#include "micro_models.hpp"
#include "naive_checker.hpp"
#include "suite.hpp"
#include "test_util.hpp"
#include "ttm/check/checker.hpp"
#include "ttm/check/formula.hpp"

namespace ttm::oracle {
namespace {

TEST(ClockTables, RandomMicroModels) {
  std::mt19937_64 rng(2024);
  std::size_t checked = 0;
  for (int i = 0; i < 500; ++i) {
    MicroModel mm = random_micro_model(rng);
    test::Loaded l = test::load(mm.source);
    std::string r = clock_conformance(*l.sys, mm, checked);
    ASSERT_EQ(r, "") << mm.source;
  }
  EXPECT_GT(checked, 100000u);
}

TEST(ClockTables, GeneratorCoversAllShapes) {
  std::mt19937_64 rng(5);
  bool timer = false, indexed = false, unbounded = false, bounded = false, disj = false;
  for (int i = 0; i < 200; ++i) {
    MicroModel mm = random_micro_model(rng);
    timer = timer || mm.has_timer;
    for (const auto& e : mm.events) {
      indexed = indexed || e.indexed;
      unbounded = unbounded || !e.u;
      bounded = bounded || e.u;
      disj = disj || !e.conj;
    }
  }
  EXPECT_TRUE(timer && indexed && unbounded && bounded && disj);
}

class SuiteTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(SuiteTest, AgreesWithNaiveChecker) {
  const SuiteModel& sm = suite_models()[GetParam()];
  test::Loaded l = test::load(sm.source);
  EXPECT_LE(naive_reachable(*l.sys), 2000u);
  for (bool fair : {true, false}) {
    check::CheckOptions opts;
    opts.fairness = fair;
    check::ModelChecker mc(*l.sys, opts);
    for (const auto& text : suite_formulas()) {
      syntax::Expr f = check::expand_quantifiers(syntax::parse_formula(text), l.flat);
      check::Verdict v = mc.check(f);
      EXPECT_EQ(v.holds, naive_check(*l.sys, f, fair)) << text << " fairness=" << fair;
      if (v.counterexample)
        EXPECT_TRUE(check::validate(*l.sys, *v.counterexample, f, mc.fairness()).empty()) << text;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Models, SuiteTest, ::testing::Range<std::size_t>(0, 10),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           return suite_models()[info.param].name;
                         });

TEST(Suite, Shape) {
  EXPECT_EQ(suite_models().size(), 10u);
  EXPECT_EQ(suite_formulas().size(), 20u);
}

}  // namespace
}  // namespace ttm::oracle
