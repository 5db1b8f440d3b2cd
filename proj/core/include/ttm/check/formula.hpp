#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttm/elab/flat_model.hpp"
#include "ttm/syntax/ast.hpp"

namespace ttm::check {

/// One checkable instance of a declared property: parameters are replaced
/// by values, so `liveness(t : TRAIN)` yields `liveness(A)`, `liveness(B)`.
struct PropertyInstance {
  std::string name;
  std::string label;
  syntax::Expr formula;
};

/// Parses the property text and substitutes every parameter valuation.
std::vector<PropertyInstance> instantiate(const syntax::PropertySource& p, const elab::FlatModel& m);

/// Expands `forall`/`exists` into conjunctions/disjunctions over value
/// literals, resolves names (constants, symbols, variables, timers and
/// events; unique `.suffix` matches for instance-qualified names), and
/// expands event atoms that omit demonic indices into disjunctions over the
/// demonic valuations. Model folds (`&&`, `||`) are left in place.
///
/// Throws UnknownSet, UnknownAtom (unknown or ambiguous name) and
/// ArityError (event atom or `mono` with the wrong number of arguments).
syntax::Expr expand_quantifiers(const syntax::Expr& f, const elab::FlatModel& m);

/// Value literal for `v` drawn from `d` (symbol name, integer or boolean).
syntax::Expr literal(const elab::FlatModel& m, const elab::Domain& d, std::int64_t v);

bool is_temporal_free(const syntax::Expr& e);
/// True when the formula mentions an event atom.
bool has_event_atoms(const syntax::Expr& f, const elab::FlatModel& m);

// ---------------------------------------------------------------- LTL core

enum class LtlKind : std::uint8_t { True, False, Atom, NotAtom, And, Or, Next, Until, Release };

struct LtlNode {
  LtlKind kind = LtlKind::True;
  int a = -1, b = -1;  // operands; Atom/NotAtom: atom index in `a`
  bool operator==(const LtlNode&) const = default;
};

/// Hash-consed negation normal form. Atoms are the maximal temporal-free
/// subformulas of the input.
class Ltl {
 public:
  /// Builds the NNF of `f` (or of its negation).
  static Ltl from(const syntax::Expr& f, bool negate);

  int root() const { return root_; }
  const LtlNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<syntax::Expr>& atoms() const { return atoms_; }
  std::string render(int i) const;

  int make(LtlKind k, int a = -1, int b = -1);

 private:
  int build(const syntax::Expr& e, bool neg);
  int atom(const syntax::Expr& e, bool neg);

  std::vector<LtlNode> nodes_;
  std::vector<syntax::Expr> atoms_;
  std::vector<std::string> atom_keys_;
  int root_ = -1;
};

}  // namespace ttm::check
