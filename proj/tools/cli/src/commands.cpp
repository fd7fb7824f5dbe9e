#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "naive/cli.hpp"
#include "naive/density_io.hpp"
#include "naive/dsl.hpp"
#include "naive/error.hpp"

namespace naive::cli {

namespace {

// Carries an exit code out of a command after its message is printed.
struct Abort {
  int code;
};

std::string read_file(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "error: cannot read '" << path << "'\n";
    throw Abort{kIo};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const KnowledgeBase> load_kb(const std::string& path, std::ostream& err) {
  const std::string text = read_file(path, err);
  ParseResult parsed = parse_kb(text, path);
  for (const auto& d : parsed.diagnostics) err << format_diagnostic(d) << '\n';
  if (!parsed.ok()) throw Abort{kDiagnostics};
  auto problems = validate(parsed.kb);
  for (const auto& d : problems) {
    auto it = parsed.variable_spans.find(d.variable);
    if (it != parsed.variable_spans.end())
      err << path << ':' << it->second.line << ':' << it->second.col_start << ": ";
    else
      err << path << ": ";
    err << "error " << d.code << ": " << d.variable << ": " << d.message << '\n';
  }
  if (!problems.empty()) throw Abort{kDiagnostics};
  return std::make_shared<const KnowledgeBase>(std::move(parsed.kb));
}

EvalOptions options_from_env(bool no_cache, std::ostream& err) {
  EvalOptions opts;
  opts.caching = !no_cache;
  if (const char* g = std::getenv("NAIVE_GRID")) {
    char* end = nullptr;
    const long v = std::strtol(g, &end, 10);
    if (end == g || *end != '\0' || v < GridPolicy::kMinResolution || v > 1'000'000) {
      err << "error: NAIVE_GRID must be an integer in [" << GridPolicy::kMinResolution
          << ", 1000000]\n";
      throw Abort{kUsage};
    }
    opts.grid.resolution = static_cast<int>(v);
  }
  return opts;
}

void load_observations(EvalContext& ctx, const std::string& path, std::ostream& err) {
  const std::string text = read_file(path, err);
  ObservationFile file = parse_observations(text, ctx.kb());
  for (const auto& e : file.errors) err << path << ':' << e.line << ": " << e.message << '\n';
  if (!file.errors.empty()) throw Abort{kDiagnostics};
  for (auto& o : file.observations) ctx.report_observation(std::move(o));
}

TimeSpec parse_time_flag(const std::string& text, std::ostream& err) {
  try {
    return parse_time_spec(text);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    throw Abort{kUsage};
  }
}

std::string fmt10(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void print_density(std::ostream& out, const Density& d, const std::string& format) {
  if (format == "json") out << to_json(d, 2) << '\n';
  else if (format == "csv") out << to_csv(d);
  else out << summarize(d);
}

struct EvalArgs {
  std::string kb, obs, var, at, over, series, out = "summary";
  bool explain = false, no_cache = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  auto kb = load_kb(a.kb, err);
  EvalContext ctx(kb, options_from_env(a.no_cache, err));
  load_observations(ctx, a.obs, err);
  const int given = !a.at.empty() + !a.over.empty() + !a.series.empty();
  if (given != 1) {
    err << "error: give exactly one of --at, --over, --series\n";
    return kUsage;
  }
  std::vector<TimeSpec> times;
  if (!a.series.empty()) {
    TimeSpec s = parse_time_flag(a.series, err);
    if (const auto* ts = std::get_if<TimeSeriesSpec>(&s))
      for (auto p : ts->points()) times.emplace_back(p);
    else
      times.push_back(s);
  } else {
    TimeSpec t = parse_time_flag(a.at.empty() ? a.over : a.at, err);
    if (!a.over.empty() && shape_of(t) != TimeShape::interval) {
      err << "error: --over needs an interval 'start/end'\n";
      return kUsage;
    }
    if (!a.at.empty() && shape_of(t) != TimeShape::instant) {
      err << "error: --at needs an instant\n";
      return kUsage;
    }
    times.push_back(t);
  }
  for (const auto& t : times) {
    out << a.var << " @ " << to_string(t) << '\n';
    if (a.explain) {
      auto [d, trace] = ctx.explain(a.var, t);
      print_density(out, d, a.out);
      out << "trace:\n" << format_trace(trace);
    } else {
      print_density(out, ctx.evaluate(a.var, t), a.out);
    }
  }
  return kOk;
}

struct CheckArgs {
  std::string kb, obs;
  std::vector<std::string> pairs;
  double threshold = 0.0;
};

int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  auto kb = load_kb(a.kb, err);
  EvalOptions opts = options_from_env(false, err);
  opts.contradiction_threshold = a.threshold;
  EvalContext ctx(kb, opts);
  load_observations(ctx, a.obs, err);

  int found = 0;
  for (const auto& pair : a.pairs) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      err << "error: --pair expects DATUM=MODEL, got '" << pair << "'\n";
      return kUsage;
    }
    const std::string datum = pair.substr(0, eq), model = pair.substr(eq + 1);
    for (const auto* name : {&datum, &model}) {
      if (!kb->find(*name)) {
        err << "error: unknown variable '" << *name << "'\n";
        return kUsage;
      }
    }
    const auto observations = ctx.observations(datum);
    for (const auto& o : observations) {
      auto c = ctx.check_consistency(o, model);
      if (!c) continue;
      ++found;
      out << "contradiction " << datum << " @ " << to_string(c->time)
          << " p=" << fmt10(c->probability) << " model=" << model << '\n';
    }
  }
  if (found == 0) out << "consistent\n";
  return found == 0 ? kOk : kDiagnostics;
}

struct TrendArgs {
  std::string kb, obs, var, at, epsilon, band;
};

int cmd_trend(const TrendArgs& a, std::ostream& out, std::ostream& err) {
  auto kb = load_kb(a.kb, err);
  EvalContext ctx(kb, options_from_env(false, err));
  load_observations(ctx, a.obs, err);
  const VariableDef* def = kb->find(a.var);
  if (!def) {
    err << "error: unknown variable '" << a.var << "'\n";
    return kUsage;
  }
  TrendProc spec;
  Range out_range = Range::ordinal({std::begin(kTrendLabels), std::end(kTrendLabels)});
  const TrendProc* declared =
      def->procedure ? std::get_if<TrendProc>(&def->procedure->node) : nullptr;
  if (declared) {
    spec = *declared;
    out_range = def->range;
  } else if (def->range.is_cardinal()) {
    spec.source = def->name;
  } else {
    err << "error: '" << a.var << "' is neither a trend nor a cardinal variable\n";
    return kUsage;
  }
  try {
    if (!a.epsilon.empty()) spec.epsilon = Duration::parse(a.epsilon);
    if (!a.band.empty()) spec.band = std::stod(a.band);
  } catch (const std::exception& e) {
    err << "error: bad --epsilon or --band: " << e.what() << '\n';
    return kUsage;
  }
  TimeSpec t = parse_time_flag(a.at, err);
  const auto* at = std::get_if<TimePoint>(&t);
  if (!at) {
    err << "error: --at needs an instant\n";
    return kUsage;
  }
  Density d = ctx.eval_trend(spec, *at, out_range);
  for (std::size_t i = 0; i < d.pmf().size(); ++i)
    out << d.range().labels[i] << ' ' << fmt10(d.pmf()[i]) << '\n';
  return kOk;
}

struct SessionArgs {
  std::string kb, script, out = "summary";
  bool no_cache = false;
};

int cmd_session(const SessionArgs& a, std::ostream& out, std::ostream& err) {
  auto kb = load_kb(a.kb, err);
  EvalContext ctx(kb, options_from_env(a.no_cache, err));
  const std::string script = read_file(a.script, err);
  std::istringstream lines(script);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string verb, name, time;
    ls >> verb;
    if (verb.empty() || verb.front() == '#') continue;
    try {
      if (!(ls >> name >> time)) throw ArgumentError("expected '" + verb + " NAME TIME ...'");
      if (verb == "observe") {
        std::string value;
        std::getline(ls, value);
        Observation o = decode_observation(*kb, name, time, value);
        out << "observe " << name << " @ " << to_string(o.time) << '\n';
        ctx.report_observation(std::move(o));
      } else if (verb == "eval" || verb == "explain") {
        std::string rest;
        if (ls >> rest) throw ArgumentError("unexpected '" + rest + "'");
        TimeSpec t = parse_time_spec(time);
        out << verb << ' ' << name << " @ " << to_string(t) << '\n';
        if (verb == "eval") {
          print_density(out, ctx.evaluate(name, t), a.out);
        } else {
          auto [d, trace] = ctx.explain_uncached(name, t);
          print_density(out, d, a.out);
          out << format_trace(trace);
        }
      } else {
        throw ArgumentError("unknown command '" + verb + "'; expected observe, eval or explain");
      }
    } catch (const Error& e) {
      err << a.script << ':' << line_no << ": " << e.what() << '\n';
      return kDiagnostics;
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic temporal inference over .nkb knowledge bases", "naive"};
  app.require_subcommand(1);

  std::string validate_kb;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a knowledge base");
  validate_cmd->add_option("kb", validate_kb, "Knowledge base (.nkb)")->required();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a variable");
  eval_cmd->add_option("kb", ea.kb, "Knowledge base (.nkb)")->required();
  eval_cmd->add_option("obs", ea.obs, "Observations (.csv)")->required();
  eval_cmd->add_option("--var", ea.var, "Variable to evaluate")->required();
  eval_cmd->add_option("--at", ea.at, "Instant");
  eval_cmd->add_option("--over", ea.over, "Interval start/end");
  eval_cmd->add_option("--series", ea.series, "Comma-separated instants");
  eval_cmd->add_option("--out", ea.out, "Output format")
      ->check(CLI::IsMember({"summary", "csv", "json"}));
  eval_cmd->add_flag("--explain", ea.explain, "Print the evaluation trace");
  eval_cmd->add_flag("--no-cache", ea.no_cache, "Disable the density cache");

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "Report contradicting observations");
  check_cmd->add_option("kb", ca.kb, "Knowledge base (.nkb)")->required();
  check_cmd->add_option("obs", ca.obs, "Observations (.csv)")->required();
  check_cmd->add_option("--pair", ca.pairs, "DATUM=MODEL")->required();
  check_cmd->add_option("--threshold", ca.threshold, "Report when p <= threshold");

  TrendArgs ta;
  auto* trend_cmd = app.add_subcommand("trend", "Trend probabilities of a variable");
  trend_cmd->add_option("kb", ta.kb, "Knowledge base (.nkb)")->required();
  trend_cmd->add_option("obs", ta.obs, "Observations (.csv)")->required();
  trend_cmd->add_option("--var", ta.var, "Trend or cardinal variable")->required();
  trend_cmd->add_option("--at", ta.at, "Instant")->required();
  trend_cmd->add_option("--epsilon", ta.epsilon, "Half-width, e.g. 12h");
  trend_cmd->add_option("--band", ta.band, "Stable band in source units");

  SessionArgs sa;
  auto* session_cmd = app.add_subcommand("session", "Run an observe/eval/explain script");
  session_cmd->add_option("kb", sa.kb, "Knowledge base (.nkb)")->required();
  session_cmd->add_option("script", sa.script, "Session script")->required();
  session_cmd->add_option("--out", sa.out, "Output format")
      ->check(CLI::IsMember({"summary", "csv", "json"}));
  session_cmd->add_flag("--no-cache", sa.no_cache, "Disable the density cache");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) {
      load_kb(validate_kb, err);
      out << "ok\n";
      return kOk;
    }
    if (*eval_cmd) return cmd_eval(ea, out, err);
    if (*check_cmd) return cmd_check(ca, out, err);
    if (*trend_cmd) return cmd_trend(ta, out, err);
    if (*session_cmd) return cmd_session(sa, out, err);
  } catch (const Abort& a) {
    return a.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDiagnostics;
  }
  return kUsage;
}

}  // namespace naive::cli
