#include "naive/density_io.hpp"

#include <charconv>
#include <sstream>

#include "json.hpp"
#include "naive/error.hpp"

namespace naive {

namespace {

using nlohmann::json;

json range_json(const Range& r) {
  json j;
  j["kind"] = std::string(to_string(r.kind));
  if (!r.name.empty()) j["name"] = r.name;
  if (r.is_cardinal()) {
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["unit"] = r.unit;
  } else {
    j["labels"] = r.labels;
  }
  return j;
}

Range range_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto name = j.value("name", std::string());
  Range r;
  if (kind == "cardinal") {
    r = Range::cardinal(j.at("lower").get<double>(), j.at("upper").get<double>(),
                        j.value("unit", std::string()), name);
  } else if (kind == "ordinal") {
    r = Range::ordinal(j.at("labels").get<std::vector<std::string>>(), name);
  } else if (kind == "categorical") {
    r = Range::categorical(j.at("labels").get<std::vector<std::string>>(), name);
  } else {
    throw ArgumentError("unknown range kind '" + kind + "'");
  }
  require_valid(r);
  return r;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_json(const Range& r, int indent) { return range_json(r).dump(indent); }

std::string to_json(const Density& f, int indent) {
  json j;
  j["range"] = range_json(f.range());
  if (f.is_discrete()) {
    json pmf = json::array();
    for (std::size_t i = 0; i < f.pmf().size(); ++i)
      pmf.push_back(json::array({f.range().labels[i], f.pmf()[i]}));
    j["pmf"] = std::move(pmf);
  } else {
    json atoms = json::array();
    for (const auto& a : f.atoms()) atoms.push_back(json::array({a.x, a.mass}));
    json pieces = json::array();
    for (const auto& c : f.cells()) pieces.push_back(json::array({c.lo, c.hi, c.height}));
    j["atoms"] = std::move(atoms);
    j["pieces"] = std::move(pieces);
  }
  return j.dump(indent);
}

Density density_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    Range r = range_from(j.at("range"));
    if (r.is_discrete()) {
      std::vector<double> p(r.labels.size(), 0.0);
      for (const auto& e : j.at("pmf")) {
        const auto label = e.at(0).get<std::string>();
        auto idx = r.label_index(label);
        if (!idx) throw ArgumentError("unknown label '" + label + "'");
        p[*idx] = e.at(1).get<double>();
      }
      return Density::from_pmf(std::move(r), std::move(p));
    }
    std::vector<Atom> atoms;
    for (const auto& e : j.value("atoms", json::array()))
      atoms.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    std::vector<Cell> cells;
    for (const auto& e : j.value("pieces", json::array()))
      cells.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
    return Density::from_parts(std::move(r), std::move(atoms), std::move(cells));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed density json: ") + e.what());
  }
}

std::string to_csv(const Density& f, int points) {
  std::ostringstream os;
  if (f.is_discrete()) {
    os << "label,p,cdf\n";
    double acc = 0.0;
    for (std::size_t i = 0; i < f.pmf().size(); ++i) {
      acc += f.pmf()[i];
      os << f.range().labels[i] << ',' << fmt(f.pmf()[i]) << ',' << fmt(acc) << '\n';
    }
    return os.str();
  }
  if (points < 2) throw ArgumentError("csv export needs at least two points");
  os << "x,pdf,cdf\n";
  const auto& r = f.range();
  for (int i = 0; i < points; ++i) {
    const double x = i == points - 1
                         ? r.upper
                         : r.lower + r.span() * static_cast<double>(i) / (points - 1);
    os << fmt(x) << ',' << fmt(f.pdf(x)) << ',' << fmt(f.cdf(x)) << '\n';
  }
  return os.str();
}

}  // namespace naive
