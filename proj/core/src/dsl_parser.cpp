#include <cmath>
#include <limits>
#include <set>

#include "dsl_lexer.hpp"
#include "naive/dsl.hpp"
#include "naive/error.hpp"

namespace naive {

std::string format_diagnostic(const ParseDiagnostic& d) {
  return d.span.file + ":" + std::to_string(d.span.line) + ":" +
         std::to_string(d.span.col_start) + ": " +
         (d.severity == Severity::error ? "error " : "warning ") + d.code + ": " + d.message;
}

bool ParseResult::ok() const {
  for (const auto& d : diagnostics)
    if (d.severity == Severity::error) return false;
  return true;
}

namespace {

using dsl::Tok;
using dsl::Token;

struct Failure {};

bool is_statement_keyword(const Token& t) {
  return t.kind == Tok::ident &&
         (t.text == "range" || t.text == "datum" || t.text == "const" || t.text == "infer");
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string file, ParseResult& out)
      : toks_(std::move(tokens)), file_(std::move(file)), out_(out) {}

  void run() {
    while (peek().kind != Tok::end) {
      try {
        statement();
      } catch (const Failure&) {
        synchronize();
      }
    }
  }

 private:
  // --- token helpers ---------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_punct(char c, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == Tok::punct && t.text[0] == c;
  }
  bool at_ident(std::string_view s) const {
    return peek().kind == Tok::ident && peek().text == s;
  }
  bool accept_punct(char c) {
    if (!at_punct(c)) return false;
    advance();
    return true;
  }

  SourceSpan span(const Token& t) const { return {file_, t.line, t.col, t.end_col}; }

  void diag(std::string_view code, std::string msg, const Token& t) {
    out_.diagnostics.push_back({Severity::error, std::string(code), std::move(msg), span(t)});
  }

  [[noreturn]] void fail(std::string_view code, std::string msg, const Token& t) {
    diag(code, std::move(msg), t);
    throw Failure{};
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::end: return "end of input";
      case Tok::string: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  void expect_punct(char c) {
    if (!accept_punct(c))
      fail(pcode::kExpected, std::string("expected '") + c + "', found " + describe(peek()),
           peek());
  }

  std::string expect_ident(std::string_view what) {
    if (peek().kind != Tok::ident)
      fail(pcode::kExpected, "expected " + std::string(what) + ", found " + describe(peek()),
           peek());
    return advance().text;
  }

  void expect_keyword(std::string_view kw) {
    if (!at_ident(kw))
      fail(pcode::kExpected, "expected '" + std::string(kw) + "', found " + describe(peek()),
           peek());
    advance();
  }

  double expect_number(std::string_view what) {
    if (peek().kind != Tok::number)
      fail(pcode::kExpected, "expected " + std::string(what) + ", found " + describe(peek()),
           peek());
    return advance().number;
  }

  int expect_integer(std::string_view what) {
    const Token& t = peek();
    double v = expect_number(what);
    if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max())
      fail(pcode::kBadInteger, std::string(what) + " must be an integer, found " + t.text, t);
    return static_cast<int>(v);
  }

  Duration expect_duration(std::string_view what) {
    if (peek().kind != Tok::duration)
      fail(pcode::kExpected,
           "expected " + std::string(what) + " duration, found " + describe(peek()), peek());
    return Duration::seconds(advance().seconds);
  }

  void synchronize() {
    if (peek().kind != Tok::end) advance();
    while (peek().kind != Tok::end && !is_statement_keyword(peek())) advance();
  }

  // --- statements ------------------------------------------------------------

  void statement() {
    const Token& kw = peek();
    if (kw.kind != Tok::ident || !is_statement_keyword(kw))
      fail(pcode::kUnknownStatement,
           "expected 'range', 'datum', 'const' or 'infer', found " + describe(kw), kw);
    const std::string which = advance().text;
    if (which == "range") return range_decl();

    const Token& name_tok = peek();
    std::string name = expect_ident("variable name");
    expect_punct(':');
    Range range = range_ref();
    if (which == "datum") {
      ShapeSet shapes = shape_set();
      out_.kb.add(datum(name, std::move(range), shapes));
    } else if (which == "const") {
      expect_punct('=');
      Density d = constant_expr(range);
      VariableDef v = constant(name, std::move(d));
      v.range = range;
      out_.kb.add(std::move(v));
    } else {
      ShapeSet shapes = shape_set();
      expect_punct('=');
      Procedure p = procedure();
      out_.kb.add(inference(name, std::move(range), std::move(p), shapes));
    }
    out_.variable_spans.emplace(name, span(name_tok));
  }

  void range_decl() {
    const Token& name_tok = peek();
    std::string name = expect_ident("range name");
    expect_punct('=');
    Range r = range_body();
    r.name = name;
    if (out_.kb.find_range(name)) {
      diag(pcode::kDuplicateRange, "range '" + name + "' is already declared", name_tok);
      return;
    }
    out_.kb.add_range(std::move(r));
  }

  Range range_ref() {
    if (at_ident("cardinal") || at_ident("ordinal") || at_ident("categorical"))
      return range_body();
    const Token& t = peek();
    std::string name = expect_ident("range");
    if (const Range* r = out_.kb.find_range(name)) return *r;
    fail(pcode::kUndefinedRange, "range '" + name + "' is not declared", t);
  }

  Range range_body() {
    const Token& t = peek();
    std::string kind = expect_ident("range kind");
    if (kind == "cardinal") {
      double lo = expect_number("lower bound");
      if (peek().kind != Tok::dotdot)
        fail(pcode::kExpected, "expected '..', found " + describe(peek()), peek());
      advance();
      double hi = expect_number("upper bound");
      std::string unit;
      if (at_ident("unit")) {
        advance();
        if (peek().kind != Tok::string)
          fail(pcode::kExpected, "expected unit string, found " + describe(peek()), peek());
        unit = advance().text;
      }
      return Range::cardinal(lo, hi, std::move(unit));
    }
    if (kind == "ordinal" || kind == "categorical") {
      const char sep = kind == "ordinal" ? '<' : ',';
      expect_punct('{');
      std::vector<std::string> labels{expect_ident("label")};
      while (accept_punct(sep)) labels.push_back(expect_ident("label"));
      expect_punct('}');
      return kind == "ordinal" ? Range::ordinal(std::move(labels))
                               : Range::categorical(std::move(labels));
    }
    fail(pcode::kExpected, "expected 'cardinal', 'ordinal' or 'categorical', found '" + kind + "'",
         t);
  }

  ShapeSet shape_set() {
    if (!accept_punct('@')) return {};
    ShapeSet s{false, false};
    do {
      const Token& t = peek();
      std::string shape = expect_ident("time shape");
      if (shape == "instant") s.instant = true;
      else if (shape == "interval") s.interval = true;
      else fail(pcode::kUnknownShape, "unknown time shape '" + shape + "'", t);
    } while (accept_punct('|'));
    return s;
  }

  // --- constants -------------------------------------------------------------

  Density constant_expr(const Range& range) {
    const Token& t = peek();
    std::string form = expect_ident("constant form");
    try {
      if (form == "uniform") {
        expect_punct('(');
        double lo = expect_number("lower bound");
        expect_punct(',');
        double hi = expect_number("upper bound");
        expect_punct(')');
        return make_uniform(lo, hi, range);
      }
      if (form == "delta") {
        expect_punct('(');
        double x = expect_number("value");
        expect_punct(')');
        return make_delta(x, range);
      }
      if (form == "pmf") {
        expect_punct('{');
        std::vector<std::pair<std::string, double>> w;
        do {
          std::string label = expect_ident("label");
          expect_punct(':');
          w.emplace_back(std::move(label), expect_number("weight"));
        } while (accept_punct(','));
        expect_punct('}');
        return make_pmf(w, range);
      }
      if (form == "piecewise") {
        expect_punct('{');
        std::vector<Atom> atoms;
        std::vector<Cell> cells;
        do {
          if (at_ident("atom")) {
            advance();
            double x = expect_number("atom location");
            expect_punct(':');
            atoms.push_back({x, expect_number("atom mass")});
          } else {
            expect_punct('[');
            double lo = expect_number("cell start");
            expect_punct(',');
            double hi = expect_number("cell end");
            expect_punct(']');
            expect_punct(':');
            cells.push_back({lo, hi, expect_number("cell height")});
          }
        } while (accept_punct(','));
        expect_punct('}');
        return Density::from_parts(range, std::move(atoms), std::move(cells));
      }
    } catch (const Error& e) {
      fail(pcode::kBadConstant, std::string("invalid constant: ") + e.what(), t);
    }
    fail(pcode::kBadConstant,
         "unknown constant form '" + form + "'; expected uniform, delta, pmf or piecewise", t);
  }

  // --- procedures ------------------------------------------------------------

  Procedure procedure() {
    const Token& t = peek();
    std::string head = expect_ident("procedure");
    if (head == "chain" && at_punct('[')) return chain();
    if (!at_punct('(')) return {RefProc{head}};
    advance();
    std::optional<ArithOp> op = parse_arith_op(head);
    if (op) {
      ArithProc a{*op, expect_ident("operand"), {}};
      expect_punct(',');
      a.right = expect_ident("operand");
      expect_punct(')');
      return {a};
    }
    if (head == "threshold") return threshold();
    if (head == "nearest_obs") return nearest_obs();
    if (head == "linear_fit") return linear_fit();
    if (head == "causal_balance") return causal_balance();
    if (head == "fuse") {
      BayesFusionProc f;
      f.sources.push_back(expect_ident("source"));
      while (accept_punct(',')) f.sources.push_back(expect_ident("source"));
      expect_punct(')');
      return {f};
    }
    if (head == "trend") return trend();
    fail(pcode::kUnknownProcedure, "unknown procedure '" + head + "'", t);
  }

  // Parses ", key=value" pairs up to ')', dispatching each key to `handle`,
  // which returns false for unknown keys.
  template <typename F>
  void kwargs(F handle) {
    std::set<std::string> seen;
    while (accept_punct(',')) {
      const Token& k = peek();
      std::string key = expect_ident("argument name");
      expect_punct('=');
      if (!seen.insert(key).second) fail(pcode::kBadArgument, "duplicate argument '" + key + "'", k);
      if (!handle(key)) fail(pcode::kBadArgument, "unknown argument '" + key + "'", k);
    }
    expect_punct(')');
  }

  Interval interval() {
    Interval iv;
    if (accept_punct('[')) iv.lo_closed = true;
    else if (accept_punct('(')) iv.lo_closed = false;
    else fail(pcode::kExpected, "expected '[' or '(', found " + describe(peek()), peek());
    iv.lo = expect_number("interval start");
    expect_punct(',');
    iv.hi = expect_number("interval end");
    if (accept_punct(']')) iv.hi_closed = true;
    else if (accept_punct(')')) iv.hi_closed = false;
    else fail(pcode::kExpected, "expected ']' or ')', found " + describe(peek()), peek());
    return iv;
  }

  Procedure threshold() {
    ThresholdProc th;
    th.source = expect_ident("threshold source");
    expect_punct(')');
    expect_punct('{');
    do {
      const Token& lt = peek();
      std::string label = expect_ident("label");
      expect_punct(':');
      std::vector<Interval> ivs{interval()};
      while (accept_punct('|')) ivs.push_back(interval());
      try {
        th.partition.push_back({std::move(label), EventSet::of_intervals(std::move(ivs))});
      } catch (const Error& e) {
        fail(pcode::kExpected, std::string("bad interval set: ") + e.what(), lt);
      }
    } while (accept_punct(','));
    expect_punct('}');
    return {th};
  }

  Procedure nearest_obs() {
    NearestObsProc n;
    n.datum = expect_ident("datum");
    kwargs([&](const std::string& k) {
      if (k == "radius") {
        if (peek().kind == Tok::ident) n.radius = advance().text;
        else n.radius = expect_duration("radius");
      } else if (k == "else") {
        n.fallback = expect_ident("fallback variable");
      } else {
        return false;
      }
      return true;
    });
    return {n};
  }

  Procedure linear_fit() {
    LinearFitProc f;
    f.datum = expect_ident("datum");
    kwargs([&](const std::string& k) {
      if (k == "n") f.n = expect_integer("n");
      else if (k == "window") f.window = expect_duration("window");
      else if (k == "min_points") f.min_points = expect_integer("min_points");
      else if (k == "else") f.fallback = expect_ident("fallback variable");
      else return false;
      return true;
    });
    return {f};
  }

  Procedure causal_balance() {
    const Token& start = peek();
    CausalBalanceProc c;
    // The first key has no leading comma.
    std::set<std::string> seen;
    auto handle = [&](const std::string& k) {
      if (k == "base") c.base = expect_ident("base datum");
      else if (k == "in") c.inflow = expect_ident("inflow variable");
      else if (k == "out") c.outflow = expect_ident("outflow variable");
      else if (k == "else") c.fallback = expect_ident("fallback variable");
      else if (k == "rate") {
        c.rate = expect_number("rate");
        expect_punct('/');
        if (peek().kind == Tok::duration) {
          c.rate_per = expect_duration("rate period");
        } else {
          const Token& u = peek();
          std::string unit = expect_ident("rate unit");
          try {
            c.rate_per = Duration::parse("1" + unit);
          } catch (const Error&) {
            fail(pcode::kBadDuration, "bad rate unit '" + unit + "'", u);
          }
        }
      } else {
        return false;
      }
      return true;
    };
    const Token& k = peek();
    std::string key = expect_ident("argument name");
    expect_punct('=');
    seen.insert(key);
    if (!handle(key)) fail(pcode::kBadArgument, "unknown argument '" + key + "'", k);
    while (accept_punct(',')) {
      const Token& kt = peek();
      std::string name = expect_ident("argument name");
      expect_punct('=');
      if (!seen.insert(name).second)
        fail(pcode::kBadArgument, "duplicate argument '" + name + "'", kt);
      if (!handle(name)) fail(pcode::kBadArgument, "unknown argument '" + name + "'", kt);
    }
    expect_punct(')');
    for (const char* required : {"base", "in", "out"})
      if (!seen.count(required))
        fail(pcode::kBadArgument,
             std::string("causal_balance needs argument '") + required + "'", start);
    return {c};
  }

  Procedure trend() {
    TrendProc tr;
    tr.source = expect_ident("trend source");
    kwargs([&](const std::string& k) {
      if (k == "epsilon") tr.epsilon = expect_duration("epsilon");
      else if (k == "band") tr.band = expect_number("band");
      else return false;
      return true;
    });
    return {tr};
  }

  Criterion criterion() {
    const Token& t = peek();
    std::string kind = expect_ident("criterion");
    Criterion c;
    if (kind == "always") return c;
    if (kind == "obs_within") {
      c.kind = Criterion::Kind::obs_within;
      expect_punct('(');
      c.datum = expect_ident("datum");
      expect_punct(',');
      c.window = expect_duration("window");
      expect_punct(')');
      return c;
    }
    if (kind == "obs_count") {
      c.kind = Criterion::Kind::obs_count;
      expect_punct('(');
      c.datum = expect_ident("datum");
      expect_punct(',');
      c.window = expect_duration("window");
      expect_punct(',');
      c.min_count = expect_integer("count");
      expect_punct(')');
      return c;
    }
    if (kind == "obs_before") {
      c.kind = Criterion::Kind::obs_before;
      expect_punct('(');
      c.datum = expect_ident("datum");
      expect_punct(')');
      return c;
    }
    fail(pcode::kUnknownCriterion, "unknown criterion '" + kind + "'", t);
  }

  Procedure chain() {
    expect_punct('[');
    RankedChainProc ch;
    do {
      ChainBranch b;
      if (accept_punct('(')) {
        b.procedure = procedure();
        if (at_ident("if")) {
          advance();
          b.criterion = criterion();
        }
        expect_punct(')');
      } else {
        b.procedure = procedure();
      }
      ch.branches.push_back(std::move(b));
    } while (accept_punct(','));
    expect_punct(']');
    return {ch};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string file_;
  ParseResult& out_;
};

}  // namespace

ParseResult parse_kb(std::string_view text, std::string file) {
  ParseResult result;
  auto tokens = dsl::lex(text, file, result.diagnostics);
  Parser(std::move(tokens), std::move(file), result).run();
  return result;
}

}  // namespace naive
