#include "naive/timebase.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <limits>

#include "naive/error.hpp"

namespace naive {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t y;
  unsigned m;
  unsigned d;
};

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

constexpr bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

// Minimal cursor over the timestamp text.
class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}
  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  // Exactly `width` digits, or any positive count when width == 0.
  std::int64_t digits(std::size_t width, std::string_view what) {
    std::size_t start = pos_;
    while (!done() && std::isdigit(static_cast<unsigned char>(s_[pos_])) &&
           (width == 0 || pos_ - start < width))
      ++pos_;
    std::size_t n = pos_ - start;
    if (n == 0 || (width != 0 && n != width))
      throw ArgumentError("malformed timestamp: expected " + std::string(what));
    std::int64_t v = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, v);
    return v;
  }
  void skip_digits() {
    while (!done() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::int64_t parse_clock(Cursor& c) {
  std::int64_t hh = c.digits(2, "hour");
  if (!c.eat(':')) throw ArgumentError("malformed timestamp: expected ':'");
  std::int64_t mm = c.digits(2, "minute");
  std::int64_t ss = 0;
  if (c.eat(':')) {
    ss = c.digits(2, "second");
    if (c.eat('.')) c.skip_digits();
  }
  if (hh > 23 || mm > 59 || ss > 60)
    throw ArgumentError("malformed timestamp: clock out of range");
  return hh * 3600 + mm * 60 + ss;
}

std::int64_t parse_offset(Cursor& c) {
  if (c.done() || c.eat('Z')) return 0;
  int sign = 0;
  if (c.eat('+')) sign = 1;
  else if (c.eat('-')) sign = -1;
  else throw ArgumentError("malformed timestamp: trailing characters");
  std::int64_t hh = c.digits(2, "offset hour");
  c.eat(':');
  std::int64_t mm = c.digits(2, "offset minute");
  return sign * (hh * 3600 + mm * 60);
}

}  // namespace

// --- Duration --------------------------------------------------------------

Duration Duration::parse(std::string_view text) {
  if (text.empty()) throw ArgumentError("empty duration");
  bool neg = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    neg = text[0] == '-';
    ++i;
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
  if (ec != std::errc() || ptr == text.data() + i)
    throw ArgumentError("malformed duration '" + std::string(text) + "'");
  std::string_view unit(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
  std::int64_t scale = 0;
  if (unit == "s") scale = 1;
  else if (unit == "m") scale = 60;
  else if (unit == "h") scale = 3600;
  else if (unit == "d") scale = 86400;
  else
    throw ArgumentError("duration '" + std::string(text) + "' needs a unit of s, m, h or d");
  if (v > std::numeric_limits<std::int64_t>::max() / scale)
    throw ArgumentError("duration overflow");
  return Duration(neg ? -v * scale : v * scale);
}

std::string Duration::to_string() const {
  std::int64_t s = seconds_;
  if (s == 0) return "0s";
  if (s % 86400 == 0) return std::to_string(s / 86400) + "d";
  if (s % 3600 == 0) return std::to_string(s / 3600) + "h";
  if (s % 60 == 0) return std::to_string(s / 60) + "m";
  return std::to_string(s) + "s";
}

// --- TimePoint -------------------------------------------------------------

TimePoint TimePoint::parse(std::string_view text) {
  Cursor c(text);
  std::int64_t days = 0;
  if (text.substr(0, 3) == "Day") {
    for (int k = 0; k < 3; ++k) c.eat(text[static_cast<std::size_t>(k)]);
    std::int64_t n = c.digits(0, "day number");
    if (n < 1) throw ArgumentError("relative day numbers start at Day1");
    days = n - 1;
  } else {
    std::int64_t y = c.digits(4, "year");
    if (!c.eat('-')) throw ArgumentError("malformed timestamp: expected '-'");
    auto m = static_cast<unsigned>(c.digits(2, "month"));
    if (!c.eat('-')) throw ArgumentError("malformed timestamp: expected '-'");
    auto d = static_cast<unsigned>(c.digits(2, "day"));
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
      throw ArgumentError("malformed timestamp: date out of range");
    days = days_from_civil(y, m, d);
  }
  std::int64_t secs = days * 86400;
  if (c.eat('T') || c.eat(' ')) {
    secs += parse_clock(c);
    secs -= parse_offset(c);
  }
  if (!c.done()) throw ArgumentError("malformed timestamp '" + std::string(text) + "'");
  return TimePoint(secs);
}

std::string TimePoint::to_iso() const {
  std::int64_t days = seconds_ >= 0 ? seconds_ / 86400 : -((-seconds_ + 86399) / 86400);
  std::int64_t rem = seconds_ - days * 86400;
  Civil cv = civil_from_days(days);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(cv.y), cv.m, cv.d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

TimeInterval TimeInterval::make(TimePoint start, TimePoint end) {
  if (end < start) throw ArgumentError("time interval ends before it starts");
  return {start, end};
}

TimeSeriesSpec::TimeSeriesSpec(std::vector<TimePoint> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw ArgumentError("time series must be non-empty");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i - 1] < points_[i]))
      throw ArgumentError("time series must be strictly increasing");
  }
}

TimeShape shape_of(const TimeSpec& t) {
  return static_cast<TimeShape>(t.index());
}

std::string_view to_string(TimeShape shape) {
  switch (shape) {
    case TimeShape::instant: return "instant";
    case TimeShape::interval: return "interval";
    case TimeShape::series: return "series";
  }
  return "?";
}

TimeSpec parse_time_spec(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return TimeInterval::make(TimePoint::parse(text.substr(0, slash)),
                              TimePoint::parse(text.substr(slash + 1)));
  }
  if (text.find(',') != std::string_view::npos) {
    std::vector<TimePoint> pts;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto comma = text.find(',', start);
      auto piece = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
      pts.push_back(TimePoint::parse(piece));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return TimeSeriesSpec(std::move(pts));
  }
  return TimePoint::parse(text);
}

std::string to_string(const TimeSpec& t) {
  struct Visitor {
    std::string operator()(const TimePoint& p) const { return p.to_iso(); }
    std::string operator()(const TimeInterval& iv) const {
      return iv.start.to_iso() + "/" + iv.end.to_iso();
    }
    std::string operator()(const TimeSeriesSpec& s) const {
      std::string out;
      for (const auto& p : s.points()) {
        if (!out.empty()) out += ",";
        out += p.to_iso();
      }
      return out;
    }
  };
  return std::visit(Visitor{}, t);
}

// --- predicates ------------------------------------------------------------

bool within_radius(TimePoint t, TimePoint obs, Duration r) {
  if (r < Duration{}) throw ArgumentError("radius must be non-negative");
  return (t - obs).abs() <= r;
}

namespace {

// Earlier point wins a tie in distance.
bool closer(TimePoint a, TimePoint b, TimePoint t) {
  Duration da = (a - t).abs();
  Duration db = (b - t).abs();
  if (da != db) return da < db;
  return a < b;
}

}  // namespace

TimePoint nearest(std::span<const TimePoint> ts, TimePoint t) {
  if (ts.empty()) throw ArgumentError("nearest of an empty list");
  return *std::min_element(ts.begin(), ts.end(), [&](TimePoint a, TimePoint b) {
    return closer(a, b, t);
  });
}

TimeSeriesSpec k_nearest(std::span<const TimePoint> ts, TimePoint t,
                         std::size_t k) {
  if (ts.empty()) throw ArgumentError("k_nearest of an empty list");
  if (k < 1) throw ArgumentError("k_nearest needs k >= 1");
  std::vector<TimePoint> pts(ts.begin(), ts.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::sort(pts.begin(), pts.end(),
            [&](TimePoint a, TimePoint b) { return closer(a, b, t); });
  if (pts.size() > k) pts.resize(k);
  std::sort(pts.begin(), pts.end());
  return TimeSeriesSpec(std::move(pts));
}

}  // namespace naive
