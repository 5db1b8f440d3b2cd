#include <gtest/gtest.h>

#include <json.hpp>

#include "test_util.hpp"
#include "ttm/check/checker.hpp"
#include "ttm/check/formula.hpp"
#include "ttm/sim/session.hpp"

namespace ttm::sim {
namespace {

using nlohmann::json;
using lts::TransitionName;

std::shared_ptr<const lts::System> system_of(const std::string& model) { return test::load_file(model).sys; }

json state(const Session& s) { return json::parse(s.state_json()); }

TEST(Session, InitialStates) {
  Session nop(system_of("nop_sync.ttm"));
  json st = state(nop);
  EXPECT_EQ(st["configuration"]["state"]["c_NOPparmtrip"], "e_Trip");
  EXPECT_EQ(st["step"], 0);

  Session train(system_of("train_abstract.ttm"));
  for (const auto& [t, where] : state(train)["configuration"]["state"]["loc"].items()) EXPECT_EQ(where, "Out") << t;
}

TEST(Session, EnabledListsUrgencyAndAdvances) {
  Session nop(system_of("nop_sync.ttm"));
  auto en = nop.enabled();
  ASSERT_EQ(en.size(), 1u);
  EXPECT_EQ(en[0].label, "tick");
  EXPECT_EQ(en[0].advances, std::vector<std::string>{"sync_env_c.act"});
  nop.fire("tick");
  // act is [1, 1]: urgent now, so no tick.
  en = nop.enabled();
  ASSERT_EQ(en.size(), 1u);
  EXPECT_EQ(en[0].label, "sync_env_c.act#");
  nop.fire(en[0].name);
  en = nop.enabled();
  ASSERT_FALSE(en.empty());
  for (const auto& t : en) EXPECT_EQ(t.name.kind, TransitionName::Kind::Event);
}

TEST(Session, FireMoveOut) {
  Session s(system_of("train_abstract.ttm"));
  for (const char* t : {"arrive#(A)", "arrive(A)", "ctrl_entry_signal#(P1)", "ctrl_entry_signal(P1)", "move_in#(A)",
                        "move_in(A)", "ctrl_platform_signal#(P1)", "ctrl_platform_signal(P1)", "move_out#(A)",
                        "move_out(A)"})
    ASSERT_NO_THROW(s.fire(t)) << t;
  EXPECT_EQ(state(s)["configuration"]["state"]["loc"]["A"], "Exit");
  EXPECT_EQ(s.history().size(), 10u);
}

TEST(Session, Errors) {
  Session s(system_of("train_abstract.ttm"));
  EXPECT_EQ(test::first_error([&] { s.fire("move_out#(A)"); }).kind, ErrorKind::NotEnabled);
  EXPECT_EQ(test::first_error([&] { s.fire("arrive#(A)", 1); }).kind, ErrorKind::BadChoice);
  EXPECT_EQ(test::first_error([&] { s.undo(1); }).kind, ErrorKind::BadIndex);
  EXPECT_EQ(test::first_error([&] { s.fire("bogus"); }).kind, ErrorKind::NotEnabled);
}

TEST(Session, ExplicitDemonicChoice) {
  test::Loaded l = test::load(test::single_module("  events\n    pick do v :: 1..3 end\n"));
  Session s(l.sys);
  s.fire("m.pick#");
  auto succ = s.successors(s.enabled().front().name);
  ASSERT_EQ(succ.size(), 3u);
  for (std::size_t k = 0; k < succ.size(); ++k) {
    s.fire("m.pick", k);
    EXPECT_EQ(s.current(), succ[k].config);
    EXPECT_EQ(s.history().back().choice, k);
    s.undo();
  }
  EXPECT_EQ(test::first_error([&] { s.fire("m.pick", 3); }).kind, ErrorKind::BadChoice);
}

// fire followed by undo(1) restores the session, and redo replays the step.
TEST(Session, FireUndoIdentity) {
  Session s(system_of("train_refined.ttm"), 11);
  s.random_walk(40);
  const std::string before = s.state_json();
  const auto hist = s.history().size();
  for (const auto& t : s.enabled()) {
    s.fire(t.name, 0);
    s.undo(1);
    EXPECT_EQ(s.state_json().substr(0, before.find("\"redo\"")), before.substr(0, before.find("\"redo\"")));
    EXPECT_EQ(s.history().size(), hist);
  }
  s.undo(hist);
  EXPECT_EQ(s.current(), s.initial());
  EXPECT_EQ(s.forward().size(), hist + 1);
  for (std::size_t i = 0; i < hist; ++i) ASSERT_TRUE(s.redo());
  EXPECT_EQ(s.history().size(), hist);
  EXPECT_EQ(s.state_json().substr(0, before.find("\"redo\"")), before.substr(0, before.find("\"redo\"")));
}

TEST(Session, SeededWalksAreDeterministic) {
  auto sys = system_of("train_abstract_demonic.ttm");
  Session a(sys, 42), b(sys, 42), c(sys, 43);
  a.random_walk(300);
  b.random_walk(300);
  c.random_walk(300);
  EXPECT_EQ(a.export_trace(), b.export_trace());
  EXPECT_NE(a.export_trace(), c.export_trace());
}

TEST(Session, HistoryReplaysToCurrent) {
  auto sys = system_of("philosophers.ttm");
  Session s(sys, 5);
  s.random_walk(200);
  lts::Configuration c = sys->initial();
  for (const auto& st : s.history()) {
    auto succ = sys->step(c, st.name);
    ASSERT_LT(st.choice, succ.size());
    c = succ[st.choice].config;
    EXPECT_EQ(sys->digest(c), st.digest);
    EXPECT_EQ(sys->violated_invariant(c.data()), "");
  }
  EXPECT_EQ(c, s.current());
}

TEST(Trace, RoundTrip) {
  auto sys = system_of("train_refined.ttm");
  Session s(sys, 8);
  s.random_walk(120);
  s.undo(20);
  std::string text = s.export_trace();
  Session t = Session::import_trace(sys, text);
  EXPECT_EQ(t.export_trace(), text);
  EXPECT_EQ(t.current(), s.current());
  EXPECT_EQ(t.forward().size(), 20u);
  EXPECT_EQ(t.state_json(), s.state_json());

  json header = json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(header["format"], "ttm-trace");
  EXPECT_EQ(header["version"], 1);
  EXPECT_EQ(header["model"], hex(s.model_hash()));
}

TEST(Trace, ModelMismatch) {
  Session s(system_of("train_abstract.ttm"), 1);
  s.random_walk(5);
  Diagnostic d = test::first_error([&] { Session::import_trace(system_of("train_refined.ttm"), s.export_trace()); });
  EXPECT_EQ(d.kind, ErrorKind::ModelMismatch);
}

TEST(Trace, ReplayDivergence) {
  auto sys = system_of("train_abstract.ttm");
  Session s(sys, 1);
  s.random_walk(6);
  std::string text = s.export_trace();
  // Corrupt the digest of the last step.
  auto pos = text.rfind("\"digest\":\"");
  ASSERT_NE(pos, std::string::npos);
  pos += 10;
  text[pos] = text[pos] == '0' ? '1' : '0';
  EXPECT_EQ(test::first_error([&] { Session::import_trace(sys, text); }).kind, ErrorKind::ReplayDivergence);
  EXPECT_EQ(test::first_error([&] { Session::import_trace(sys, "not json\n"); }).kind, ErrorKind::ReplayDivergence);
}

TEST(Trace, CheckerLassoImport) {
  test::Loaded l = test::load_file("train_abstract_demonic.ttm");
  check::ModelChecker mc(*l.sys);
  auto inst = check::instantiate(*l.src.find_property("liveness"), l.flat).front();
  check::Verdict v = mc.check(inst.formula);
  ASSERT_TRUE(v.counterexample && v.counterexample->loop_start);
  const auto& cx = *v.counterexample;

  Session s = Session::import_trace(l.sys, counterexample_trace(*l.sys, cx));
  ASSERT_EQ(s.loop_start(), cx.loop_start);
  EXPECT_EQ(s.history().size(), *cx.loop_start);
  EXPECT_EQ(s.current(), cx.configs[*cx.loop_start]);
  const std::uint64_t start = l.sys->digest(s.current());
  const std::size_t cycle = cx.labels.size() - *cx.loop_start;
  ASSERT_EQ(s.forward().size(), cycle);
  for (std::size_t i = 0; i < cycle; ++i) ASSERT_TRUE(s.redo());
  EXPECT_FALSE(s.redo());
  // One full cycle returns to the loop start.
  EXPECT_EQ(l.sys->digest(s.current()), start);
}

}  // namespace
}  // namespace ttm::sim
