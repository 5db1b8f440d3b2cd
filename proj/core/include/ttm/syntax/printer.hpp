#pragma once

#include <string>

#include "ttm/syntax/ast.hpp"

namespace ttm::syntax {

/// Renders AST nodes back to concrete syntax. The output reparses to a
/// structurally equal AST; parentheses are inserted only where precedence
/// requires them (folds are always parenthesized).
std::string print(const Expr& e);
std::string print(const TypeExpr& t);
std::string print(const Stmt& s);
std::string print(const EventDecl& ev);
std::string print(const ModuleDecl& m);
std::string print(const CompositionExpr& c);
std::string print(const SourceModel& m);

}  // namespace ttm::syntax
