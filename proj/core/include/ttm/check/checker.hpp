#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ttm/check/buchi.hpp"
#include "ttm/check/formula.hpp"
#include "ttm/lts/explore.hpp"

namespace ttm::check {

struct FairnessObligation {
  enum class Kind : std::uint8_t { Justice, Compassion };
  Kind kind = Kind::Justice;
  int slot = 0;  // clock slot: event and fair valuation
};

/// One obligation per clock slot of every just or compassionate event, and a
/// justice obligation for every event with a finite upper bound.
std::vector<FairnessObligation> obligations(const lts::System& sys);

/// en(e,v) for the obligation's slot.
bool obligation_enabled(const lts::System& sys, const lts::Value* c, const FairnessObligation& o);
/// The configuration was entered by an Event(e,v,.) step.
bool obligation_taken(const lts::System& sys, const lts::Value* c, const FairnessObligation& o);

/// A path from the initial configuration. configs.size() == labels.size() + 1
/// and labels[i] leads from configs[i] to configs[i + 1]. For a lasso,
/// configs.back() equals configs[*loop_start] and the cycle is the suffix.
struct Counterexample {
  std::vector<lts::Configuration> configs;
  std::vector<lts::TransitionName> labels;
  std::optional<std::size_t> loop_start;
};

struct CheckStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t product_states = 0;
  std::size_t automaton_states = 0;
  double seconds = 0;
};

struct Verdict {
  bool holds = true;
  std::optional<Counterexample> counterexample;
  CheckStats stats;
  std::string method;  // "invariant" or "ltl"
};

struct CheckOptions {
  lts::ExploreOptions explore;
  std::size_t max_automaton_states = 4096;
  /// Disables every fairness obligation (plain LTL over all executions).
  bool fairness = true;
  /// Use reachability for formulas of the form [] p.
  bool invariant_fast_path = true;
};

/// Checks properties of one system. The reachable graph is explored once,
/// on first use by an LTL check, and shared by later checks.
class ModelChecker {
 public:
  explicit ModelChecker(const lts::System& sys, CheckOptions opts = {});
  ~ModelChecker();

  /// Decides whether every fair execution satisfies `f` (quantifier-expanded).
  /// Throws StateLimitExceeded, FormulaTooLarge, Deadlock.
  Verdict check(const syntax::Expr& f);
  /// Reachability check of [] p; the counterexample is a finite path.
  Verdict check_invariant(const syntax::Expr& p);

  const lts::LtsGraph& graph();
  const std::vector<FairnessObligation>& fairness() const { return obligations_; }
  const lts::System& system() const { return sys_; }

 private:
  Verdict check_ltl(const syntax::Expr& f);

  const lts::System& sys_;
  CheckOptions opts_;
  std::vector<FairnessObligation> obligations_;
  std::unique_ptr<lts::LtsGraph> graph_;
};

/// One-shot convenience wrappers.
Verdict check(const lts::System& sys, const syntax::Expr& f, const CheckOptions& opts = {});
Verdict check_invariant(const lts::System& sys, const syntax::Expr& p, const CheckOptions& opts = {});

/// If `f` is `[] p` with p temporal-free, returns p.
std::optional<syntax::Expr> invariant_body(const syntax::Expr& f);

/// Evaluates temporal-free expressions over configurations.
class StateEvaluator {
 public:
  StateEvaluator(const lts::System& sys, const std::vector<syntax::Expr>& atoms);
  ~StateEvaluator();
  bool eval(int atom, const lts::Value* c) const;
  std::uint64_t mask(const lts::Value* c) const;
  std::size_t size() const { return roots_.size(); }

 private:
  const lts::System& sys_;
  std::unique_ptr<lts::Code> code_;
  std::vector<int> roots_;
};

/// Problems found when validating a counterexample: replay through step,
/// fairness on the cycle, and (for lassos) independent evaluation showing
/// that `f` is false on the lasso. Empty when the counterexample is sound.
std::vector<std::string> validate(const lts::System& sys, const Counterexample& cex, const syntax::Expr& f,
                                  const std::vector<FairnessObligation>& obligations);

/// Truth of `f` at position 0 of the lasso (ultimately periodic word).
bool eval_on_lasso(const lts::System& sys, const syntax::Expr& f, const Counterexample& cex);

std::string render(const lts::System& sys, const Counterexample& cex);

}  // namespace ttm::check
