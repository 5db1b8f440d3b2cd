#include "ttm/sim/session.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace ttm::sim {

using lts::Configuration;
using lts::TransitionName;
using nlohmann::json;

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

Session::Session(std::shared_ptr<const lts::System> sys, std::uint64_t seed)
    : sys_(std::move(sys)),
      seed_(seed),
      rng_(seed),
      model_hash_(elab::model_hash(sys_->model())),
      initial_(sys_->initial()) {}

std::vector<EnabledTransition> Session::enabled() const {
  std::vector<EnabledTransition> out;
  const Configuration& c = current();
  for (const auto& t : sys_->enabled(c)) {
    EnabledTransition e;
    e.name = t;
    e.label = sys_->render(t);
    auto succ = sys_->step(c, t);
    if (t.kind == TransitionName::Kind::Tick) {
      const Configuration& n = succ.front().config;
      const auto& m = sys_->model();
      for (std::size_t i = 0; i < m.timers.size(); ++i) {
        auto off = static_cast<std::size_t>(sys_->timer_offset(static_cast<int>(i)));
        if (n[off] != c[off]) e.advances.push_back(m.timers[i].name);
      }
      for (int s = 0; s < sys_->slot_count(); ++s) {
        auto off = static_cast<std::size_t>(sys_->clock_offset(s));
        if (c[off] >= 0 && n[off] > c[off]) e.advances.push_back(sys_->slot_name(s));
      }
    }
    e.choices = succ.size();
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<lts::Successor> Session::successors(const TransitionName& t) const { return sys_->step(current(), t); }

std::size_t Session::draw(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

const Configuration& Session::fire(const TransitionName& t, std::optional<std::size_t> choice) {
  auto succ = sys_->step(current(), t);  // throws NotEnabled
  if (choice && *choice >= succ.size())
    throw Error(ErrorKind::BadChoice,
                fmt::format("choice {} is not among the {} successors of '{}'", *choice, succ.size(), sys_->render(t)));
  std::size_t k = choice ? *choice : (succ.size() > 1 ? draw(succ.size()) : 0);
  Step s;
  s.name = t;
  s.choice = k;
  s.config = std::move(succ[k].config);
  s.digest = sys_->digest(s.config);
  history_.push_back(std::move(s));
  forward_.clear();
  loop_start_.reset();
  return current();
}

const Configuration& Session::fire(std::string_view transition, std::optional<std::size_t> choice) {
  auto t = sys_->parse_transition(transition);
  if (!t) throw Error(ErrorKind::NotEnabled, fmt::format("unknown transition '{}'", transition));
  return fire(*t, choice);
}

void Session::undo(std::size_t k) {
  if (k > history_.size())
    throw Error(ErrorKind::BadIndex, fmt::format("cannot undo {} steps; the history has {}", k, history_.size()));
  for (std::size_t i = 0; i < k; ++i) {
    forward_.push_back(std::move(history_.back()));
    history_.pop_back();
  }
}

bool Session::redo() {
  if (forward_.empty()) return false;
  Step s = std::move(forward_.back());
  forward_.pop_back();
  auto succ = sys_->step(current(), s.name);
  if (s.choice >= succ.size() || sys_->digest(succ[s.choice].config) != s.digest)
    throw Error(ErrorKind::ReplayDivergence, fmt::format("step '{}' no longer replays", sys_->render(s.name)));
  history_.push_back(std::move(s));
  return true;
}

std::size_t Session::random_walk(std::size_t steps) {
  std::size_t fired = 0;
  for (; fired < steps; ++fired) {
    auto en = sys_->enabled(current());
    if (en.empty()) break;
    fire(en[draw(en.size())]);
  }
  return fired;
}

std::string Session::state_json() const {
  json j;
  j["configuration"] = json::parse(sys_->to_json(current()));
  j["digest"] = hex(sys_->digest(current()));
  j["step"] = history_.size();
  j["redo"] = forward_.size();
  if (loop_start_) j["loop_start"] = *loop_start_;
  return j.dump();
}

namespace {

std::string header(const lts::System& sys, std::uint64_t model, std::uint64_t seed,
                   std::optional<std::size_t> loop_start, std::optional<std::size_t> position = std::nullopt) {
  json h{{"format", "ttm-trace"},
         {"version", 1},
         {"model", hex(model)},
         {"seed", seed},
         {"initial", hex(sys.digest(sys.initial()))}};
  if (loop_start) h["loop_start"] = *loop_start;
  if (position) h["position"] = *position;
  return h.dump() + "\n";
}

std::string step_line(const lts::System& sys, const TransitionName& t, std::size_t choice, std::uint64_t digest) {
  return json{{"transition", sys.render(t)}, {"choice", choice}, {"digest", hex(digest)}}.dump() + "\n";
}

}  // namespace

std::string Session::export_trace() const {
  std::string out = header(*sys_, model_hash_, seed_, loop_start_, forward_.empty() ? std::nullopt : std::optional(history_.size()));
  for (const auto& s : history_) out += step_line(*sys_, s.name, s.choice, s.digest);
  for (auto it = forward_.rbegin(); it != forward_.rend(); ++it) out += step_line(*sys_, it->name, it->choice, it->digest);
  return out;
}

Session Session::import_trace(std::shared_ptr<const lts::System> sys, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  json h;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {}
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ReplayDivergence, fmt::format("malformed trace header: {}", e.what()));
  }
  if (!h.is_object() || h.value("format", "") != "ttm-trace")
    throw Error(ErrorKind::ReplayDivergence, "not a trace file (missing format header)");
  Session s(sys, h.value("seed", std::uint64_t{0}));
  if (h.value("model", "") != hex(s.model_hash_))
    throw Error(ErrorKind::ModelMismatch,
                fmt::format("trace was recorded on model {}, this model is {}", h.value("model", "?"), hex(s.model_hash_)));
  if (h.value("initial", "") != hex(sys->digest(s.initial_)))
    throw Error(ErrorKind::ReplayDivergence, "initial configuration digest does not match");
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++n;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ReplayDivergence, fmt::format("step {}: malformed line: {}", n, e.what()));
    }
    if (!j.is_object()) throw Error(ErrorKind::ReplayDivergence, fmt::format("step {}: not a JSON object", n));
    const std::string name = j.value("transition", "");
    auto t = sys->parse_transition(name);
    if (!t) throw Error(ErrorKind::ReplayDivergence, fmt::format("step {}: unknown transition '{}'", n, name));
    const std::string want = j.value("digest", "");
    std::vector<lts::Successor> succ;
    try {
      succ = sys->step(s.current(), *t);
    } catch (const Error& e) {
      throw Error(ErrorKind::ReplayDivergence, fmt::format("step {}: '{}' does not replay: {}", n, name, e.what()));
    }
    std::size_t choice = j.value("choice", std::size_t{0});
    if (choice >= succ.size() || hex(sys->digest(succ[choice].config)) != want) {
      // Tolerate a renumbered choice as long as some successor matches.
      auto it = std::find_if(succ.begin(), succ.end(),
                             [&](const lts::Successor& x) { return hex(sys->digest(x.config)) == want; });
      if (it == succ.end())
        throw Error(ErrorKind::ReplayDivergence, fmt::format("step {}: digest chain broken at '{}'", n, name));
      choice = static_cast<std::size_t>(it - succ.begin());
    }
    Step st;
    st.name = *t;
    st.choice = choice;
    st.config = std::move(succ[choice].config);
    st.digest = sys->digest(st.config);
    s.history_.push_back(std::move(st));
  }
  std::optional<std::size_t> position;
  if (h.contains("loop_start")) position = s.loop_start_ = h["loop_start"].get<std::size_t>();
  if (h.contains("position")) position = h["position"].get<std::size_t>();
  if (position) {
    if (*position > s.history_.size()) throw Error(ErrorKind::BadIndex, "trace position lies beyond the trace");
    s.undo(s.history_.size() - *position);
  }
  return s;
}

std::string counterexample_trace(const lts::System& sys, const check::Counterexample& cex) {
  std::string out = header(sys, elab::model_hash(sys.model()), 0, cex.loop_start);
  for (std::size_t i = 0; i < cex.labels.size(); ++i) {
    auto succ = sys.step(cex.configs[i], cex.labels[i]);
    std::size_t k = 0;
    while (k < succ.size() && succ[k].config != cex.configs[i + 1]) ++k;
    if (k == succ.size()) throw Error(ErrorKind::ReplayDivergence, "counterexample does not replay");
    out += step_line(sys, cex.labels[i], k, sys.digest(cex.configs[i + 1]));
  }
  return out;
}

}  // namespace ttm::sim
