#include "dsl_lexer.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>

namespace naive::dsl {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  Lexer(std::string_view text, const std::string& file, std::vector<ParseDiagnostic>& diags)
      : s_(text), file_(file), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (i_ >= s_.size()) break;
      const char c = s_[i_];
      Token t;
      t.line = line_;
      t.col = col();
      if (ident_start(c)) {
        std::size_t b = i_;
        while (i_ < s_.size() && ident_char(s_[i_])) ++i_;
        t.kind = Tok::ident;
        t.text = std::string(s_.substr(b, i_ - b));
      } else if (digit(c) ||
                 ((c == '-' || c == '+') && i_ + 1 < s_.size() && digit(s_[i_ + 1]))) {
        if (!number(t)) continue;
      } else if (c == '"') {
        if (!string(t)) continue;
      } else if (c == '.' && i_ + 1 < s_.size() && s_[i_ + 1] == '.') {
        i_ += 2;
        t.kind = Tok::dotdot;
        t.text = "..";
      } else if (std::string_view("(){}[],:=<@|/").find(c) != std::string_view::npos) {
        ++i_;
        t.kind = Tok::punct;
        t.text = std::string(1, c);
      } else {
        error(pcode::kUnexpectedChar, std::string("unexpected character '") + c + "'", col(),
              col() + 1);
        ++i_;
        continue;
      }
      t.end_col = col();
      out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::end;
    end.line = line_;
    end.col = end.end_col = col();
    out.push_back(end);
    return out;
  }

 private:
  int col() const { return static_cast<int>(i_ - line_start_) + 1; }

  void error(std::string_view code, std::string msg, int c0, int c1) {
    diags_.push_back({Severity::error, std::string(code), std::move(msg),
                      {file_, line_, c0, c1}});
  }

  void skip_space() {
    while (i_ < s_.size()) {
      const char c = s_[i_];
      if (c == '\n') {
        ++i_;
        ++line_;
        line_start_ = i_;
      } else if (c == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
      } else {
        break;
      }
    }
  }

  bool number(Token& t) {
    const std::size_t b = i_;
    const int c0 = col();
    if (s_[i_] == '-' || s_[i_] == '+') ++i_;
    bool integral = true;
    while (i_ < s_.size() && digit(s_[i_])) ++i_;
    if (i_ + 1 < s_.size() && s_[i_] == '.' && digit(s_[i_ + 1])) {
      integral = false;
      ++i_;
      while (i_ < s_.size() && digit(s_[i_])) ++i_;
    } else if (i_ < s_.size() && s_[i_] == '.' && (i_ + 1 >= s_.size() || s_[i_ + 1] != '.')) {
      // "3." with no fraction digits
      ++i_;
      while (i_ < s_.size() && (ident_char(s_[i_]) || s_[i_] == '.')) ++i_;
      error(pcode::kBadNumber, "malformed number '" + std::string(s_.substr(b, i_ - b)) + "'",
            c0, col());
      return false;
    }
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < s_.size() && (s_[j] == '-' || s_[j] == '+')) ++j;
      if (j < s_.size() && digit(s_[j])) {
        integral = false;
        i_ = j;
        while (i_ < s_.size() && digit(s_[i_])) ++i_;
      }
    }
    std::string_view raw = s_.substr(b, i_ - b);
    if (i_ < s_.size() && ident_start(s_[i_])) {
      const std::size_t u = i_;
      while (i_ < s_.size() && ident_char(s_[i_])) ++i_;
      std::string_view unit = s_.substr(u, i_ - u);
      std::int64_t scale = 0;
      if (unit == "s") scale = 1;
      else if (unit == "m") scale = 60;
      else if (unit == "h") scale = 3600;
      else if (unit == "d") scale = 86400;
      if (scale == 0 || !integral) {
        error(pcode::kBadDuration,
              "bad duration '" + std::string(s_.substr(b, i_ - b)) +
                  "': expected an integer count with unit s, m, h or d",
              c0, col());
        return false;
      }
      std::int64_t count = 0;
      std::string_view digits = raw.front() == '+' ? raw.substr(1) : raw;
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), count);
      if (res.ec != std::errc()) {
        error(pcode::kBadDuration, "duration count out of range", c0, col());
        return false;
      }
      t.kind = Tok::duration;
      t.seconds = count * scale;
      t.text = std::string(s_.substr(b, i_ - b));
      return true;
    }
    if (i_ < s_.size() && s_[i_] == '.' && i_ + 1 < s_.size() && digit(s_[i_ + 1])) {
      while (i_ < s_.size() && (digit(s_[i_]) || s_[i_] == '.')) ++i_;
      error(pcode::kBadNumber, "malformed number '" + std::string(s_.substr(b, i_ - b)) + "'",
            c0, col());
      return false;
    }
    std::string_view digits = raw.front() == '+' ? raw.substr(1) : raw;
    double v = 0.0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
      error(pcode::kBadNumber, "malformed number '" + std::string(raw) + "'", c0, col());
      return false;
    }
    t.kind = Tok::number;
    t.number = v;
    t.text = std::string(raw);
    return true;
  }

  bool string(Token& t) {
    const int c0 = col();
    std::size_t j = i_ + 1;
    while (j < s_.size() && s_[j] != '"' && s_[j] != '\n') ++j;
    if (j >= s_.size() || s_[j] != '"') {
      error(pcode::kUnterminatedString, "unterminated string", c0,
            c0 + static_cast<int>(j - i_));
      i_ = j;
      return false;
    }
    t.kind = Tok::string;
    t.text = std::string(s_.substr(i_ + 1, j - i_ - 1));
    i_ = j + 1;
    return true;
  }

  std::string_view s_;
  const std::string& file_;
  std::vector<ParseDiagnostic>& diags_;
  std::size_t i_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
};

}  // namespace

std::vector<Token> lex(std::string_view text, const std::string& file,
                       std::vector<ParseDiagnostic>& diags) {
  return Lexer(text, file, diags).run();
}

}  // namespace naive::dsl
