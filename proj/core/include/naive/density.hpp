#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "naive/range.hpp"

namespace naive {

/// Point mass at `x`.
struct Atom {
  double x = 0.0;
  double mass = 0.0;
  bool operator==(const Atom&) const = default;
};

/// Constant density `height` on [lo, hi].
struct Cell {
  double lo = 0.0;
  double hi = 0.0;
  double height = 0.0;
  double mass() const { return (hi - lo) * height; }
  bool operator==(const Cell&) const = default;
};

/// Interval with independently open or closed ends. Only the ends matter for
/// atoms; cells integrate the same either way.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  bool contains(double x) const;
  bool empty() const;
  bool operator==(const Interval&) const = default;
};

/// A measurable subset of a range: a label subset or a finite union of
/// disjoint intervals, kept sorted.
class EventSet {
 public:
  static EventSet of_labels(std::vector<std::string> labels);
  static EventSet of_intervals(std::vector<Interval> intervals);
  static EventSet of_interval(Interval iv) { return of_intervals({iv}); }

  bool is_labels() const { return is_labels_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Interval>& intervals() const { return intervals_; }

  bool operator==(const EventSet&) const = default;

 private:
  bool is_labels_ = false;
  std::vector<std::string> labels_;
  std::vector<Interval> intervals_;
};

/// Resolution used when an exact result leaves the piecewise-constant family.
/// Only combine_arith re-projects; fuse, mixture and threshold_map are exact.
struct GridPolicy {
  int resolution = 512;
  /// Divisor zero-neighborhood half-width as a fraction of the divisor's
  /// range span.
  double zero_guard_fraction = 1e-6;

  static constexpr int kMinResolution = 8;
  void validate() const;
};

struct DensityAccess;

/// A normalized density: atoms plus non-overlapping cells over a cardinal
/// range, or a pmf aligned with the labels of a discrete range.
class Density {
 public:
  /// Canonicalizes (sorts atoms, merges coinciding atoms, merges overlapping
  /// cells, drops zero mass) and normalizes. Throws ArgumentError on zero or
  /// negative mass.
  static Density from_parts(Range range, std::vector<Atom> atoms,
                            std::vector<Cell> cells);
  static Density from_pmf(Range range, std::vector<double> probabilities);

  const Range& range() const { return range_; }
  bool is_discrete() const { return range_.is_discrete(); }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const double> pmf() const { return pmf_; }

  double total_mass() const;
  double probability(std::string_view label) const;
  /// Mass of the atom located exactly at x (0 if none).
  double atom_mass_at(double x) const;
  /// Height of cells containing x, treating cells as closed and taking the
  /// larger height on a shared edge.
  double height_at(double x) const;
  /// Continuous density at x with half-open cells [lo, hi), except that the
  /// right edge of a contiguous run of cells is closed; atoms excluded.
  double pdf(double x) const;
  /// P(X <= x).
  double cdf(double x) const;
  /// [min, max] of the support (cardinal only).
  std::pair<double, double> support() const;

  /// First violated invariant, if any.
  std::optional<std::string> invariant_violation(double tolerance = 1e-9) const;

  bool operator==(const Density&) const = default;

 private:
  Range range_;
  std::vector<Atom> atoms_;
  std::vector<Cell> cells_;
  std::vector<double> pmf_;

  friend struct DensityAccess;
};

/// Sums possibly overlapping cells into a sorted partition. Adjacent cells
/// of identical height are joined.
std::vector<Cell> merge_cells(std::vector<Cell> cells);

Density make_uniform(double lo, double hi, const Range& range);
Density make_delta(double x, const Range& range);
Density make_pmf(std::span<const std::pair<std::string, double>> weights,
                 const Range& range);
/// Certainty on one label of a discrete range.
Density make_label(std::string_view label, const Range& range);

/// Probability that the value lies in `event`.
double prob_in(const Density& f, const EventSet& event);

enum class ArithOp { add, sub, mul, div };
std::string_view to_string(ArithOp op);
std::optional<ArithOp> parse_arith_op(std::string_view name);

struct ArithResult {
  Density density;
  /// Mass that fell outside the output range and was moved to its bounds.
  double clamped_mass = 0.0;
};

/// Density of `f op g` for independent f and g. Atom/atom and atom/cell
/// parts are exact shifts and scales; cell/cell parts (and atom/cell for
/// division) are projected onto a grid. Throws SingularityError when a
/// divisor's support reaches zero and RangeError when no part of the result
/// overlaps `out_range`.
ArithResult combine_arith(ArithOp op, const Density& f, const Density& g,
                          const Range& out_range,
                          const GridPolicy& grid = GridPolicy{});

/// Normalized pointwise product of conditionally independent evidence.
/// Throws ContradictionError when the product vanishes everywhere.
Density bayes_fuse(std::span<const Density> densities);

struct PartitionEntry {
  std::string label;
  EventSet set;
  bool operator==(const PartitionEntry&) const = default;
};

/// Describes why `partition` is not a disjoint cover of `source` (or
/// nullopt).
std::optional<std::string> partition_defect(
    std::span<const PartitionEntry> partition, const Range& source);

/// Maps a cardinal density onto the labels of `out_range`.
Density threshold_map(const Density& f,
                      std::span<const PartitionEntry> partition,
                      const Range& out_range);

Density mixture(std::span<const double> weights,
                std::span<const Density> densities);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const Density& f);

/// Left-continuous inverse CDF: the smallest x with cdf(x) >= p.
double quantile(const Density& f, double p);

}  // namespace naive
