#include "naive/range.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "naive/error.hpp"

namespace naive {

std::string_view to_string(RangeKind kind) {
  switch (kind) {
    case RangeKind::categorical: return "categorical";
    case RangeKind::ordinal: return "ordinal";
    case RangeKind::cardinal: return "cardinal";
  }
  return "?";
}

Range Range::cardinal(double lower, double upper, std::string unit,
                      std::string name) {
  Range r;
  r.kind = RangeKind::cardinal;
  r.lower = lower;
  r.upper = upper;
  r.unit = std::move(unit);
  r.name = std::move(name);
  return r;
}

Range Range::ordinal(std::vector<std::string> labels, std::string name) {
  Range r;
  r.kind = RangeKind::ordinal;
  r.labels = std::move(labels);
  r.name = std::move(name);
  r.lower = r.upper = 0.0;
  return r;
}

Range Range::categorical(std::vector<std::string> labels, std::string name) {
  Range r = ordinal(std::move(labels), std::move(name));
  r.kind = RangeKind::categorical;
  return r;
}

std::optional<std::size_t> Range::label_index(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

bool Range::same_domain(const Range& other) const {
  if (kind != other.kind) return false;
  if (is_cardinal()) {
    return lower == other.lower && upper == other.upper && unit == other.unit;
  }
  return labels == other.labels;
}

std::optional<std::string> range_defect(const Range& range) {
  if (range.is_cardinal()) {
    if (!std::isfinite(range.lower) || !std::isfinite(range.upper))
      return "cardinal bounds must be finite";
    if (!(range.lower < range.upper))
      return "cardinal lower bound must be below upper bound";
    return std::nullopt;
  }
  if (range.labels.empty()) return "label list is empty";
  std::set<std::string> seen;
  for (const auto& l : range.labels) {
    if (!seen.insert(l).second) return "duplicate label '" + l + "'";
  }
  return std::nullopt;
}

void require_valid(const Range& range) {
  if (auto d = range_defect(range)) throw RangeError("invalid range: " + *d);
}

std::string describe(const Range& range) {
  std::ostringstream os;
  if (!range.name.empty()) os << range.name << " ";
  os << to_string(range.kind);
  if (range.is_cardinal()) {
    os << " [" << range.lower << ", " << range.upper << "]";
    if (!range.unit.empty()) os << " " << range.unit;
  } else {
    os << " {";
    for (std::size_t i = 0; i < range.labels.size(); ++i)
      os << (i ? ", " : "") << range.labels[i];
    os << "}";
  }
  return os.str();
}

}  // namespace naive
