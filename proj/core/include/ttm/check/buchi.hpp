#pragma once

#include <cstdint>
#include <vector>

#include "ttm/check/formula.hpp"

namespace ttm::check {

/// Generalized Buchi automaton with state labels. A run q0 q1 ... reads
/// configurations c0 c1 ... when every ci satisfies the literals of qi.
struct Buchi {
  struct State {
    std::uint64_t pos = 0;  // atoms that must hold
    std::uint64_t neg = 0;  // atoms that must not hold
    std::vector<int> succ;
    bool accepts(std::uint64_t mask) const { return (mask & pos) == pos && (mask & neg) == 0; }
  };
  std::vector<State> states;
  std::vector<int> initial;
  /// One entry per acceptance set; acceptance[i][q] marks membership.
  std::vector<std::vector<bool>> acceptance;
};

/// Tableau construction for the NNF formula rooted at `ltl.root()`.
/// Throws FormulaTooLarge past `max_states` states or 64 atoms.
Buchi build_buchi(const Ltl& ltl, std::size_t max_states = 4096);

}  // namespace ttm::check
