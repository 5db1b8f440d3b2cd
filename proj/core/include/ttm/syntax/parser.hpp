#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttm/syntax/ast.hpp"

namespace ttm::syntax {

struct ParseResult {
  std::optional<SourceModel> model;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value() && diagnostics.empty(); }
};

/// Parses a `.ttm` model file and runs the declaration-level checks
/// (duplicate names, composition references, bounds). Never throws.
ParseResult parse(std::string_view source);

/// Like parse(), but throws Error carrying every diagnostic.
SourceModel parse_or_throw(std::string_view source);

/// A single model-language expression.
Expr parse_expression(std::string_view source);

/// A single property-language formula: model expressions plus `[]`, `<>`,
/// `U`, `forall`, `exists`, event atoms and `mono(t)`.
Expr parse_formula(std::string_view source);

/// Sidecar `.ltl` file: one `name [(params)] : formula` per line; blank lines
/// and `--` comments are skipped.
std::vector<PropertySource> parse_property_file(std::string_view source);

/// Evaluates a constant integer/boolean expression over named constants.
/// Throws Error(UnknownReference) for names outside `constants`.
std::int64_t eval_const(const Expr& e, const std::map<std::string, std::int64_t>& constants);

/// Words that cannot be used as identifiers.
bool is_reserved(std::string_view word);

}  // namespace ttm::syntax
