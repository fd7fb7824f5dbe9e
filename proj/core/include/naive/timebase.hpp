#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace naive {

/// Signed length of time with second resolution.
class Duration {
 public:
  constexpr Duration() = default;
  static constexpr Duration seconds(std::int64_t s) { return Duration(s); }
  static constexpr Duration minutes(std::int64_t m) { return Duration(m * 60); }
  static constexpr Duration hours(std::int64_t h) { return Duration(h * 3600); }
  static constexpr Duration days(std::int64_t d) { return Duration(d * 86400); }

  /// Parses "<int><unit>" with unit s, m, h or d (optional leading '-').
  static Duration parse(std::string_view text);

  constexpr std::int64_t count() const { return seconds_; }
  double in_days() const { return static_cast<double>(seconds_) / 86400.0; }
  /// Canonical text: the largest unit that divides the length exactly.
  std::string to_string() const;

  constexpr Duration operator+(Duration o) const { return Duration(seconds_ + o.seconds_); }
  constexpr Duration operator-(Duration o) const { return Duration(seconds_ - o.seconds_); }
  constexpr Duration operator-() const { return Duration(-seconds_); }
  constexpr Duration abs() const { return Duration(seconds_ < 0 ? -seconds_ : seconds_); }
  constexpr auto operator<=>(const Duration&) const = default;

 private:
  constexpr explicit Duration(std::int64_t s) : seconds_(s) {}
  std::int64_t seconds_ = 0;
};

/// Absolute UTC instant, seconds since 1970-01-01T00:00:00Z.
class TimePoint {
 public:
  constexpr TimePoint() = default;
  static constexpr TimePoint from_unix(std::int64_t s) { return TimePoint(s); }

  /// Accepts ISO-8601 dates and date-times ("2024-03-01", "2024-03-01T08:00",
  /// "2024-03-01T08:00:00Z", "...+02:00") and the relative form "Day3T08:00",
  /// where Day1 is 1970-01-01.
  static TimePoint parse(std::string_view text);

  constexpr std::int64_t unix_seconds() const { return seconds_; }
  /// "YYYY-MM-DDTHH:MM:SSZ".
  std::string to_iso() const;

  constexpr Duration operator-(TimePoint o) const { return Duration::seconds(seconds_ - o.seconds_); }
  constexpr TimePoint operator+(Duration d) const { return TimePoint(seconds_ + d.count()); }
  constexpr TimePoint operator-(Duration d) const { return TimePoint(seconds_ - d.count()); }
  constexpr auto operator<=>(const TimePoint&) const = default;

 private:
  constexpr explicit TimePoint(std::int64_t s) : seconds_(s) {}
  std::int64_t seconds_ = 0;
};

struct TimeInterval {
  TimePoint start;
  TimePoint end;

  /// Throws ArgumentError unless start <= end.
  static TimeInterval make(TimePoint start, TimePoint end);
  Duration length() const { return end - start; }
  auto operator<=>(const TimeInterval&) const = default;
};

/// Strictly increasing, non-empty list of instants.
class TimeSeriesSpec {
 public:
  explicit TimeSeriesSpec(std::vector<TimePoint> points);

  const std::vector<TimePoint>& points() const { return points_; }
  auto operator<=>(const TimeSeriesSpec&) const = default;

 private:
  std::vector<TimePoint> points_;
};

using TimeSpec = std::variant<TimePoint, TimeInterval, TimeSeriesSpec>;

enum class TimeShape { instant, interval, series };

TimeShape shape_of(const TimeSpec& t);
std::string_view to_string(TimeShape shape);

/// "a/b" parses as an interval, "a,b,c" as a series, anything else as an
/// instant.
TimeSpec parse_time_spec(std::string_view text);
std::string to_string(const TimeSpec& t);

/// |t - obs| <= r. Throws ArgumentError for a negative radius.
bool within_radius(TimePoint t, TimePoint obs, Duration r);

/// Point of `ts` closest to `t`; ties go to the earlier point.
TimePoint nearest(std::span<const TimePoint> ts, TimePoint t);

/// Up to `k` distinct points of `ts` closest to `t` (earlier wins ties),
/// returned in increasing order.
TimeSeriesSpec k_nearest(std::span<const TimePoint> ts, TimePoint t,
                         std::size_t k);

}  // namespace naive
