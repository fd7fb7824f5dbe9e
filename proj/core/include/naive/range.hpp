#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace naive {

enum class RangeKind { categorical, ordinal, cardinal };

std::string_view to_string(RangeKind kind);

/// The value set of a variable. Cardinal ranges are closed intervals with a
/// unit; categorical and ordinal ranges are label lists (ordinal in declared
/// order). `name` is empty for ranges written inline.
struct Range {
  RangeKind kind = RangeKind::cardinal;
  std::string name;
  std::vector<std::string> labels;
  double lower = 0.0;
  double upper = 1.0;
  std::string unit;

  static Range cardinal(double lower, double upper, std::string unit = {},
                        std::string name = {});
  static Range ordinal(std::vector<std::string> labels, std::string name = {});
  static Range categorical(std::vector<std::string> labels,
                           std::string name = {});

  bool is_cardinal() const { return kind == RangeKind::cardinal; }
  bool is_discrete() const { return kind != RangeKind::cardinal; }
  double span() const { return upper - lower; }
  std::optional<std::size_t> label_index(std::string_view label) const;

  /// Same value set, ignoring the declared name.
  bool same_domain(const Range& other) const;

  bool operator==(const Range&) const = default;
};

/// Returns a description of the first invariant the range violates.
std::optional<std::string> range_defect(const Range& range);

/// Throws RangeError when `range_defect` reports a problem.
void require_valid(const Range& range);

std::string describe(const Range& range);

}  // namespace naive
