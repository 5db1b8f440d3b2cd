#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ttm/diagnostics.hpp"

namespace ttm::syntax {

enum class TokenKind : std::uint8_t { Ident, Int, Symbol, Eof };

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string text;
  std::int64_t value = 0;
  SourceLoc loc;
  std::size_t offset = 0;  // byte offset of the first character
  std::size_t end = 0;     // byte offset one past the last character

  bool is(std::string_view s) const { return kind != TokenKind::Int && text == s; }
  bool is_symbol(std::string_view s) const { return kind == TokenKind::Symbol && text == s; }
};

/// Splits source text into tokens. `--` starts a comment running to the end
/// of the line. Throws Error(SyntaxError) on characters outside the grammar.
std::vector<Token> tokenize(std::string_view source);

}  // namespace ttm::syntax
