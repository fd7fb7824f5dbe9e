#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "naive/kb.hpp"

namespace naive {

struct SourceSpan {
  std::string file;
  int line = 0;
  int col_start = 0;
  int col_end = 0;
  bool operator==(const SourceSpan&) const = default;
};

enum class Severity { error, warning };

struct ParseDiagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  SourceSpan span;
};

/// "file:line:col: error P010: message"
std::string format_diagnostic(const ParseDiagnostic& d);

/// Parser diagnostic codes.
namespace pcode {
inline constexpr std::string_view kUnexpectedChar = "P001";
inline constexpr std::string_view kUnterminatedString = "P002";
inline constexpr std::string_view kBadNumber = "P003";
inline constexpr std::string_view kBadDuration = "P004";
inline constexpr std::string_view kExpected = "P010";
inline constexpr std::string_view kUnknownStatement = "P011";
inline constexpr std::string_view kUnknownProcedure = "P012";
inline constexpr std::string_view kBadArgument = "P013";
inline constexpr std::string_view kUndefinedRange = "P014";
inline constexpr std::string_view kDuplicateRange = "P015";
inline constexpr std::string_view kUnknownShape = "P016";
inline constexpr std::string_view kUnknownCriterion = "P017";
inline constexpr std::string_view kBadInteger = "P018";
inline constexpr std::string_view kBadConstant = "P020";
}  // namespace pcode

struct ParseResult {
  KnowledgeBase kb;
  std::vector<ParseDiagnostic> diagnostics;
  /// Span of each declared variable's name.
  std::map<std::string, SourceSpan> variable_spans;

  bool ok() const;
};

/// Parses `.nkb` text. Syntax errors become diagnostics; semantic checks are
/// left to validate().
ParseResult parse_kb(std::string_view text, std::string file = "<input>");

/// Canonical text: named ranges, then variables, one statement per line.
std::string serialize_kb(const KnowledgeBase& kb);

}  // namespace naive
