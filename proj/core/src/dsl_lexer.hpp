#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "naive/dsl.hpp"

namespace naive::dsl {

enum class Tok { ident, number, duration, string, punct, dotdot, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;   // identifier, string contents, punct char or raw number
  double number = 0.0;
  std::int64_t seconds = 0;  // duration tokens
  int line = 1;
  int col = 1;
  int end_col = 1;
};

/// Splits text into tokens, appending lexical diagnostics. Malformed input
/// is skipped so parsing can continue.
std::vector<Token> lex(std::string_view text, const std::string& file,
                       std::vector<ParseDiagnostic>& diags);

}  // namespace naive::dsl
