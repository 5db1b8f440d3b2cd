#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ttm/lts/lts.hpp"

namespace ttm::oracle {

/// A randomly generated model small enough to explore exhaustively, with
/// guards kept in a form the oracle can evaluate without the library.
struct MicroModel {
  struct Term {
    int lhs;           // 0: v0, 1: v1, 2: timer t0
    char op;           // '<', '=', '!', '>'  (<, ==, !=, >=)
    int k;             // constant, unless `vs_index`
    bool vs_index;     // compare against the event's fair index
  };
  struct Event {
    std::string name;
    bool indexed = false;  // `(i : fair I)` with I = 0..1
    int l = 0;
    std::optional<int> u;
    bool conj = true;
    std::vector<Term> guard;  // empty = true
  };
  std::string source;
  std::vector<Event> events;
  bool has_timer = false;
};

MicroModel random_micro_model(std::mt19937_64& rng);

/// Truth of event `e`'s guard for fair value `i` in configuration `c`.
bool micro_guard(const lts::System& sys, const MicroModel& m, std::size_t e, int i, const lts::Value* c);

/// Compares every reachable step of `sys` against a transliteration of the
/// two clock-update function tables (event step and tick) and of the
/// enabling and tick conditions. Returns a description of the first
/// disagreement, or an empty string. `checked` counts compared clock values.
std::string clock_conformance(const lts::System& sys, const MicroModel& m, std::size_t& checked,
                              std::size_t max_states = 4000);

}  // namespace ttm::oracle
