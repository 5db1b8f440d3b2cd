#include <gtest/gtest.h>

#include "naive_checker.hpp"
#include "test_util.hpp"
#include "ttm/lts/explore.hpp"

namespace ttm::lts {
namespace {

TEST(StateStore, InsertFind) {
  StateStore store(3);
  Value a[3] = {1, 2, 3}, b[3] = {1, 2, 4};
  EXPECT_EQ(store.insert(a), std::make_pair(0u, true));
  EXPECT_EQ(store.insert(b), std::make_pair(1u, true));
  EXPECT_EQ(store.insert(a), std::make_pair(0u, false));
  EXPECT_EQ(store.find(b), 1);
  Value c[3] = {0, 0, 0};
  EXPECT_EQ(store.find(c), -1);
  EXPECT_EQ(store.config(1), (Configuration{1, 2, 4}));
}

TEST(StateStore, GrowsPastManyInserts) {
  StateStore store(2);
  for (Value i = 0; i < 50000; ++i) {
    Value v[2] = {i, -i};
    ASSERT_TRUE(store.insert(v).second);
  }
  EXPECT_EQ(store.size(), 50000u);
  for (Value i = 0; i < 50000; i += 997) {
    Value v[2] = {i, -i};
    EXPECT_EQ(store.find(v), i);
  }
}

TEST(Explore, MatchesNaiveReachability) {
  for (const char* name : {"train_abstract.ttm", "train_refined.ttm", "philosophers.ttm"}) {
    test::Loaded l = test::load_file(name);
    LtsGraph g = explore(*l.sys);
    EXPECT_EQ(g.size(), oracle::naive_reachable(*l.sys)) << name;
    EXPECT_EQ(g.stats.states, g.size());
    EXPECT_EQ(g.stats.transitions, g.targets.size());
    EXPECT_EQ(g.store.config(0), l.sys->initial());
    EXPECT_TRUE(g.deadlocks.empty());
  }
}

TEST(Explore, EdgesMatchSuccessors) {
  test::Loaded l = test::load_file("train_abstract_demonic.ttm");
  const System& s = *l.sys;
  LtsGraph g = explore(s);
  std::vector<Value> out;
  for (std::uint32_t id = 0; id < g.size(); id += 7) {
    out.clear();
    s.successor_configs(g.store.get(id), out);
    const std::size_t n = out.size() / static_cast<std::size_t>(s.width());
    ASSERT_EQ(static_cast<std::size_t>(g.end(id) - g.begin(id)), n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(g.store.find(out.data() + k * s.width()), g.begin(id)[k]);
  }
}

TEST(Explore, DeterministicAcrossWorkerCounts) {
  test::Loaded l = test::load_file("nop_sync.ttm");
  ExploreOptions one;
  LtsGraph a = explore(*l.sys, one);
  ExploreOptions four;
  four.workers = 4;
  LtsGraph b = explore(*l.sys, four);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.offsets, b.offsets);
  EXPECT_EQ(a.targets, b.targets);
  for (std::uint32_t id = 0; id < a.size(); id += 101) EXPECT_EQ(a.store.config(id), b.store.config(id));
}

TEST(Explore, StateLimit) {
  test::Loaded l = test::load_file("train_refined.ttm");
  ExploreOptions o;
  o.max_states = 100;
  Diagnostic d = test::first_error([&] { explore(*l.sys, o); });
  EXPECT_EQ(d.kind, ErrorKind::StateLimitExceeded);
  EXPECT_TRUE(is_resource_error(d.kind));
}

TEST(Explore, IgnoreLastMergesConfigurations) {
  test::Loaded l = test::load_file("train_abstract.ttm");
  ExploreOptions o;
  LtsGraph full = explore(*l.sys, o);
  o.ignore_last = true;
  LtsGraph merged = explore(*l.sys, o);
  EXPECT_LT(merged.size(), full.size());
  // Labels are recovered by re-stepping.
  for (std::uint32_t id = 0; id < merged.size(); id += 13)
    for (const std::uint32_t* t = merged.begin(id); t != merged.end(id); ++t)
      EXPECT_NO_THROW(edge_label(*l.sys, merged.store.get(id), merged.store.get(*t), true));
}

TEST(Explore, GraphJsonIsDeterministic) {
  test::Loaded l = test::load_file("train_abstract.ttm");
  std::string a = graph_json(*l.sys, explore(*l.sys));
  ExploreOptions o;
  o.workers = 3;
  std::string b = graph_json(*l.sys, explore(*l.sys, o));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"edges\""), std::string::npos);
}

}  // namespace
}  // namespace ttm::lts
