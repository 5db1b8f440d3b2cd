#include "ttm/syntax/lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace ttm::syntax {
namespace {

// Longest match first.
constexpr std::array<std::string_view, 31> kSymbols = {
    "::=", "::", ":=", "..", "==", "!=", "<=", ">=", "&&", "||", "=>", "->", "[]", "<>",
    "(",   ")",  "[",  "]",  "{",  "}",  ",",  ";",  ":",  "@",  ".",  "+",  "-",  "*",
    "/",   "%",  "'"};
constexpr std::array<std::string_view, 5> kSingles = {"=", "<", ">", "!", "#"};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  std::size_t line_start = 0;
  auto loc_at = [&](std::size_t pos) {
    return SourceLoc{line, static_cast<int>(pos - line_start) + 1};
  };

  while (i < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[i]);
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    Token tok;
    tok.loc = loc_at(i);
    tok.offset = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(static_cast<unsigned char>(src[j]))) ++j;
      tok.kind = TokenKind::Ident;
      tok.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      tok.kind = TokenKind::Int;
      tok.text = std::string(src.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, tok.value);
      if (ec != std::errc{})
        throw Error(ErrorKind::SyntaxError, fmt::format("integer literal '{}' out of range", tok.text),
                    tok.loc);
      i = j;
    } else {
      std::string_view rest = src.substr(i);
      bool matched = false;
      for (auto sym : kSymbols) {
        if (rest.starts_with(sym)) {
          tok.kind = TokenKind::Symbol;
          tok.text = std::string(sym);
          i += sym.size();
          matched = true;
          break;
        }
      }
      if (!matched) {
        for (auto sym : kSingles) {
          if (rest.starts_with(sym)) {
            tok.kind = TokenKind::Symbol;
            tok.text = std::string(sym);
            i += sym.size();
            matched = true;
            break;
          }
        }
      }
      if (!matched) {
        std::string shown = (c >= 0x20 && c < 0x7f) ? std::string(1, static_cast<char>(c))
                                                    : fmt::format("\\x{:02x}", c);
        throw Error(ErrorKind::SyntaxError, fmt::format("unexpected character '{}'", shown), tok.loc);
      }
    }
    tok.end = i;
    out.push_back(std::move(tok));
  }
  Token eof;
  eof.kind = TokenKind::Eof;
  eof.loc = loc_at(i);
  eof.offset = eof.end = src.size();
  out.push_back(std::move(eof));
  return out;
}

}  // namespace ttm::syntax
