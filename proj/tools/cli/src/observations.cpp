#include <charconv>
#include <iomanip>
#include <sstream>

#include "naive/cli.hpp"
#include "naive/error.hpp"

namespace naive::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double to_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ArgumentError("'" + std::string(s) + "' is not a number");
  return v;
}

}  // namespace

Density decode_value(std::string_view value, const Range& range) {
  value = trim(value);
  const auto colon = value.find(':');
  if (colon == std::string_view::npos)
    throw ArgumentError("value '" + std::string(value) +
                        "' needs a form prefix: exact:, range: or pmf:");
  const auto form = value.substr(0, colon);
  const auto body = trim(value.substr(colon + 1));
  if (form == "exact") {
    if (range.is_discrete()) return make_label(body, range);
    return make_delta(to_number(body), range);
  }
  if (form == "range") {
    const auto comma = body.find(',');
    if (comma == std::string_view::npos)
      throw ArgumentError("range value needs 'lo,hi'");
    const double lo = to_number(body.substr(0, comma));
    const double hi = to_number(body.substr(comma + 1));
    if (lo == hi) return make_delta(lo, range);
    return make_uniform(lo, hi, range);
  }
  if (form == "pmf") {
    if (body.size() < 2 || body.front() != '{' || body.back() != '}')
      throw ArgumentError("pmf value must be written {label:w,...}");
    std::vector<std::pair<std::string, double>> weights;
    std::string_view rest = body.substr(1, body.size() - 2);
    while (!trim(rest).empty()) {
      const auto comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      const auto c = item.find(':');
      if (c == std::string_view::npos)
        throw ArgumentError("pmf entry '" + std::string(trim(item)) + "' needs label:weight");
      weights.emplace_back(std::string(trim(item.substr(0, c))), to_number(item.substr(c + 1)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return make_pmf(weights, range);
  }
  throw ArgumentError("unknown value form '" + std::string(form) + "'");
}

Observation decode_observation(const KnowledgeBase& kb, std::string_view datum,
                               std::string_view time, std::string_view value) {
  const auto& def = kb.at(trim(datum));
  if (def.kind != VariableKind::datum)
    throw ArgumentError("'" + def.name + "' is not a datum");
  TimeSpec t = parse_time_spec(trim(time));
  if (shape_of(t) == TimeShape::series)
    throw ArgumentError("an observation time must be an instant or an interval");
  return {def.name, std::move(t), decode_value(value, def.range)};
}

ObservationFile parse_observations(std::string_view csv, const KnowledgeBase& kb) {
  ObservationFile out;
  int line_no = 0;
  bool header = false;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view() : csv.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      if (line != "datum,time,value")
        out.errors.push_back({line_no, "expected header 'datum,time,value'"});
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      out.errors.push_back({line_no, "expected three fields datum,time,value"});
      continue;
    }
    try {
      out.observations.push_back(decode_observation(
          kb, line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), line.substr(c2 + 1)));
    } catch (const Error& e) {
      out.errors.push_back({line_no, e.what()});
    }
  }
  return out;
}

std::string summarize(const Density& f) {
  std::ostringstream os;
  os << std::setprecision(10);
  if (f.is_discrete()) {
    for (std::size_t i = 0; i < f.pmf().size(); ++i)
      os << "p " << f.range().labels[i] << ' ' << f.pmf()[i] << '\n';
    return os.str();
  }
  const auto m = moments(f);
  os << "mean " << m.mean << '\n'
     << "variance " << m.variance << '\n'
     << "q05 " << quantile(f, 0.05) << '\n'
     << "q50 " << quantile(f, 0.5) << '\n'
     << "q95 " << quantile(f, 0.95) << '\n';
  return os.str();
}

}  // namespace naive::cli
