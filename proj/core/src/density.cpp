#include "naive/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "density_access.hpp"
#include "naive/error.hpp"

namespace naive {

namespace {

constexpr double kNormalizeSlack = 1e-12;

bool is_finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

// --- Interval / EventSet ---------------------------------------------------

bool Interval::contains(double x) const {
  bool above = x > lo || (lo_closed && x == lo);
  bool below = x < hi || (hi_closed && x == hi);
  return above && below;
}

bool Interval::empty() const {
  return lo > hi || (lo == hi && !(lo_closed && hi_closed));
}

EventSet EventSet::of_labels(std::vector<std::string> labels) {
  EventSet s;
  s.is_labels_ = true;
  std::set<std::string> seen;
  for (auto& l : labels) {
    if (seen.insert(l).second) s.labels_.push_back(std::move(l));
  }
  return s;
}

EventSet EventSet::of_intervals(std::vector<Interval> intervals) {
  EventSet s;
  for (const auto& iv : intervals) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw ArgumentError("event interval bounds must be finite");
    if (iv.lo > iv.hi) throw ArgumentError("event interval has lo > hi");
    if (!iv.empty()) s.intervals_.push_back(iv);
  }
  std::sort(s.intervals_.begin(), s.intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < s.intervals_.size(); ++i) {
    const auto& a = s.intervals_[i - 1];
    const auto& b = s.intervals_[i];
    if (a.hi > b.lo || (a.hi == b.lo && a.hi_closed && b.lo_closed))
      throw ArgumentError("event intervals overlap");
  }
  return s;
}

void GridPolicy::validate() const {
  if (resolution < kMinResolution)
    throw ArgumentError("grid resolution must be at least 8");
  if (!(zero_guard_fraction >= 0.0))
    throw ArgumentError("zero guard fraction must be non-negative");
}

// --- Density ---------------------------------------------------------------

std::vector<Cell> merge_cells(std::vector<Cell> cells) {
  std::erase_if(cells,
                [](const Cell& c) { return !(c.hi > c.lo) || c.height == 0.0; });
  if (cells.empty()) return cells;
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.lo < b.lo; });

  bool disjoint = true;
  for (std::size_t i = 1; i < cells.size() && disjoint; ++i)
    disjoint = cells[i].lo >= cells[i - 1].hi;

  std::vector<Cell> out;
  if (disjoint) {
    out = std::move(cells);
  } else {
    struct Event {
      double x;
      double dh;
      int dc;
    };
    std::vector<Event> events;
    events.reserve(cells.size() * 2);
    for (const auto& c : cells) {
      events.push_back({c.lo, c.height, 1});
      events.push_back({c.hi, -c.height, -1});
    }
    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.x < b.x; });
    double h = 0.0;
    int active = 0;
    std::size_t i = 0;
    while (i < events.size()) {
      double x = events[i].x;
      while (i < events.size() && events[i].x == x) {
        h += events[i].dh;
        active += events[i].dc;
        ++i;
      }
      if (active == 0 || h < 0.0) h = 0.0;
      if (i < events.size() && active > 0 && h > 0.0)
        out.push_back({x, events[i].x, h});
    }
  }

  std::vector<Cell> joined;
  joined.reserve(out.size());
  for (const auto& c : out) {
    if (!joined.empty() && joined.back().hi == c.lo &&
        joined.back().height == c.height) {
      joined.back().hi = c.hi;
    } else {
      joined.push_back(c);
    }
  }
  return joined;
}

Density Density::from_parts(Range range, std::vector<Atom> atoms,
                            std::vector<Cell> cells) {
  require_valid(range);
  if (!range.is_cardinal())
    throw RangeError("atoms and cells require a cardinal range");
  for (const auto& a : atoms) {
    if (!is_finite_nonneg(a.mass) || !std::isfinite(a.x))
      throw ArgumentError("atom mass must be finite and non-negative");
    if (a.mass > 0.0 && (a.x < range.lower || a.x > range.upper))
      throw RangeError("atom lies outside the range");
  }
  for (const auto& c : cells) {
    if (!is_finite_nonneg(c.height) || !std::isfinite(c.lo) ||
        !std::isfinite(c.hi))
      throw ArgumentError("cell height must be finite and non-negative");
    if (c.lo > c.hi) throw ArgumentError("cell has lo > hi");
    if (c.height > 0.0 && c.hi > c.lo &&
        (c.lo < range.lower || c.hi > range.upper))
      throw RangeError("cell lies outside the range");
  }

  std::erase_if(atoms, [](const Atom& a) { return a.mass == 0.0; });
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.x < b.x; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().x == a.x)
      merged.back().mass += a.mass;
    else
      merged.push_back(a);
  }
  cells = merge_cells(std::move(cells));

  double total = 0.0;
  for (const auto& a : merged) total += a.mass;
  for (const auto& c : cells) total += c.mass();
  if (!(total > 0.0) || !std::isfinite(total))
    throw ArgumentError("density has zero total mass");
  if (std::abs(total - 1.0) > kNormalizeSlack) {
    for (auto& a : merged) a.mass /= total;
    for (auto& c : cells) c.height /= total;
  }
  return DensityAccess::raw(std::move(range), std::move(merged),
                            std::move(cells));
}

Density Density::from_pmf(Range range, std::vector<double> probabilities) {
  require_valid(range);
  if (!range.is_discrete())
    throw RangeError("a pmf requires a categorical or ordinal range");
  if (probabilities.size() != range.labels.size())
    throw ArgumentError("pmf size does not match the label count");
  double total = 0.0;
  for (double p : probabilities) {
    if (!is_finite_nonneg(p))
      throw ArgumentError("probabilities must be finite and non-negative");
    total += p;
  }
  if (!(total > 0.0)) throw ArgumentError("pmf weights are all zero");
  if (std::abs(total - 1.0) > kNormalizeSlack) {
    for (auto& p : probabilities) p /= total;
  }
  return DensityAccess::raw_pmf(std::move(range), std::move(probabilities));
}

double Density::total_mass() const {
  double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  for (const auto& a : atoms_) total += a.mass;
  for (const auto& c : cells_) total += c.mass();
  return total;
}

double Density::probability(std::string_view label) const {
  auto idx = range_.label_index(label);
  if (!idx || !is_discrete())
    throw RangeError("unknown label '" + std::string(label) + "'");
  return pmf_[*idx];
}

double Density::atom_mass_at(double x) const {
  auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), x,
      [](const Atom& a, double v) { return a.x < v; });
  return (it != atoms_.end() && it->x == x) ? it->mass : 0.0;
}

double Density::height_at(double x) const {
  // First cell whose hi >= x; it and its successor may both contain x.
  auto it = std::lower_bound(
      cells_.begin(), cells_.end(), x,
      [](const Cell& c, double v) { return c.hi < v; });
  double h = 0.0;
  for (int k = 0; k < 2 && it != cells_.end(); ++k, ++it) {
    if (it->lo <= x && x <= it->hi) h = std::max(h, it->height);
  }
  return h;
}

double Density::pdf(double x) const {
  auto it = std::upper_bound(
      cells_.begin(), cells_.end(), x,
      [](double v, const Cell& c) { return v < c.lo; });
  // `it` is the first cell starting after x; the candidate is the one before.
  if (it == cells_.begin()) return 0.0;
  const Cell& c = *std::prev(it);
  if (x < c.hi) return c.height;
  if (x == c.hi && (it == cells_.end() || it->lo != x)) return c.height;
  return 0.0;
}

double Density::cdf(double x) const {
  if (is_discrete()) throw RangeError("cdf requires a cardinal density");
  double p = 0.0;
  for (const auto& a : atoms_) {
    if (a.x > x) break;
    p += a.mass;
  }
  for (const auto& c : cells_) {
    if (c.lo >= x) break;
    p += c.height * (std::min(c.hi, x) - c.lo);
  }
  return std::clamp(p, 0.0, 1.0);
}

std::pair<double, double> Density::support() const {
  if (is_discrete()) throw RangeError("support requires a cardinal density");
  double lo = range_.upper;
  double hi = range_.lower;
  if (!atoms_.empty()) {
    lo = std::min(lo, atoms_.front().x);
    hi = std::max(hi, atoms_.back().x);
  }
  if (!cells_.empty()) {
    lo = std::min(lo, cells_.front().lo);
    hi = std::max(hi, cells_.back().hi);
  }
  if (lo > hi) return {range_.lower, range_.upper};
  return {lo, hi};
}

std::optional<std::string> Density::invariant_violation(
    double tolerance) const {
  if (auto d = range_defect(range_)) return "range: " + *d;
  double total = total_mass();
  if (!(std::abs(total - 1.0) <= tolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << "total mass " << total << " differs from 1";
    return os.str();
  }
  if (is_discrete()) {
    if (!atoms_.empty() || !cells_.empty())
      return "discrete density carries atoms or cells";
    if (pmf_.size() != range_.labels.size())
      return "pmf size does not match labels";
    for (double p : pmf_)
      if (!is_finite_nonneg(p)) return "negative or non-finite probability";
    return std::nullopt;
  }
  if (!pmf_.empty()) return "cardinal density carries a pmf";
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& a = atoms_[i];
    if (!is_finite_nonneg(a.mass)) return "negative or non-finite atom mass";
    if (a.x < range_.lower || a.x > range_.upper) return "atom outside range";
    if (i > 0 && !(atoms_[i - 1].x < a.x)) return "atoms not strictly sorted";
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto& c = cells_[i];
    if (!is_finite_nonneg(c.height)) return "negative or non-finite height";
    if (!(c.lo < c.hi)) return "cell with non-positive width";
    if (c.lo < range_.lower || c.hi > range_.upper) return "cell outside range";
    if (i > 0 && c.lo < cells_[i - 1].hi) return "cells overlap or unsorted";
  }
  return std::nullopt;
}

// --- constructors ----------------------------------------------------------

Density make_uniform(double lo, double hi, const Range& range) {
  require_valid(range);
  if (!range.is_cardinal()) throw RangeError("uniform requires a cardinal range");
  if (!(lo < hi)) throw RangeError("uniform needs lo < hi");
  if (lo < range.lower || hi > range.upper)
    throw RangeError("uniform bounds exceed the range");
  return DensityAccess::raw(range, {}, {Cell{lo, hi, 1.0 / (hi - lo)}});
}

Density make_delta(double x, const Range& range) {
  require_valid(range);
  if (!range.is_cardinal()) throw RangeError("delta requires a cardinal range");
  if (!std::isfinite(x) || x < range.lower || x > range.upper)
    throw RangeError("delta location outside the range");
  return DensityAccess::raw(range, {Atom{x, 1.0}}, {});
}

Density make_pmf(std::span<const std::pair<std::string, double>> weights,
                 const Range& range) {
  require_valid(range);
  if (!range.is_discrete())
    throw RangeError("pmf requires a categorical or ordinal range");
  std::vector<double> probs(range.labels.size(), 0.0);
  for (const auto& [label, w] : weights) {
    auto idx = range.label_index(label);
    if (!idx) throw ArgumentError("unknown label '" + label + "'");
    if (!is_finite_nonneg(w))
      throw ArgumentError("pmf weights must be finite and non-negative");
    probs[*idx] += w;
  }
  return Density::from_pmf(range, std::move(probs));
}

Density make_label(std::string_view label, const Range& range) {
  std::pair<std::string, double> w{std::string(label), 1.0};
  return make_pmf(std::span(&w, 1), range);
}

// --- queries ---------------------------------------------------------------

double prob_in(const Density& f, const EventSet& event) {
  const Range& r = f.range();
  double p = 0.0;
  if (f.is_discrete()) {
    if (!event.is_labels())
      throw RangeError("interval event applied to a discrete density");
    for (const auto& l : event.labels()) {
      auto idx = r.label_index(l);
      if (!idx) throw RangeError("event label '" + l + "' not in range");
      p += f.pmf()[*idx];
    }
    return std::clamp(p, 0.0, 1.0);
  }
  if (event.is_labels())
    throw RangeError("label event applied to a cardinal density");
  for (const auto& iv : event.intervals()) {
    if (iv.lo < r.lower || iv.hi > r.upper)
      throw RangeError("event interval exceeds the range");
  }
  for (const auto& a : f.atoms()) {
    for (const auto& iv : event.intervals()) {
      if (iv.contains(a.x)) {
        p += a.mass;
        break;
      }
    }
  }
  for (const auto& c : f.cells()) {
    for (const auto& iv : event.intervals()) {
      double lo = std::max(c.lo, iv.lo);
      double hi = std::min(c.hi, iv.hi);
      if (hi > lo) p += c.height * (hi - lo);
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

Moments moments(const Density& f) {
  if (f.is_discrete()) throw RangeError("moments require a cardinal density");
  double mean = 0.0;
  for (const auto& a : f.atoms()) mean += a.x * a.mass;
  for (const auto& c : f.cells()) mean += c.mass() * 0.5 * (c.lo + c.hi);
  double var = 0.0;
  for (const auto& a : f.atoms()) var += a.mass * (a.x - mean) * (a.x - mean);
  for (const auto& c : f.cells()) {
    const double d = 0.5 * (c.lo + c.hi) - mean;
    const double w = c.hi - c.lo;
    var += c.mass() * (d * d + w * w / 12.0);
  }
  return {mean, std::max(var, 0.0)};
}

double quantile(const Density& f, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ArgumentError("quantile probability must lie in [0, 1]");
  if (f.is_discrete()) throw RangeError("quantile requires a cardinal density");
  constexpr double eps = 1e-12;

  std::vector<double> xs;
  xs.reserve(f.atoms().size() + 2 * f.cells().size());
  for (const auto& a : f.atoms()) xs.push_back(a.x);
  for (const auto& c : f.cells()) {
    xs.push_back(c.lo);
    xs.push_back(c.hi);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.empty()) return f.range().lower;

  auto atoms = f.atoms();
  auto cells = f.cells();
  std::size_t ai = 0;
  std::size_t ci = 0;
  double cum = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double x = xs[k];
    if (ai < atoms.size() && atoms[ai].x == x) cum += atoms[ai++].mass;
    if (cum >= p - eps) return x;
    if (k + 1 == xs.size()) break;
    double next = xs[k + 1];
    while (ci < cells.size() && cells[ci].hi <= x) ++ci;
    double h = (ci < cells.size() && cells[ci].lo <= x) ? cells[ci].height : 0.0;
    double seg = h * (next - x);
    if (h > 0.0 && cum + seg >= p - eps) {
      return std::min(next, x + std::max(0.0, p - cum) / h);
    }
    cum += seg;
  }
  return xs.back();
}

// --- combination -----------------------------------------------------------

namespace {

void require_same_domain(std::span<const Density> ds) {
  for (const auto& d : ds) {
    if (!d.range().same_domain(ds.front().range()))
      throw RangeError("densities are defined over different ranges");
  }
}

std::vector<Cell> multiply_cells(std::span<const Cell> a,
                                 std::span<const Cell> b) {
  std::vector<Cell> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    double lo = std::max(a[i].lo, b[j].lo);
    double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) {
      double h = a[i].height * b[j].height;
      if (h > 0.0) out.push_back({lo, hi, h});
    }
    if (a[i].hi < b[j].hi)
      ++i;
    else
      ++j;
  }
  return out;
}

}  // namespace

Density bayes_fuse(std::span<const Density> densities) {
  if (densities.size() < 2)
    throw ArgumentError("fusion needs at least two densities");
  require_same_domain(densities);
  const Range& range = densities.front().range();

  if (range.is_discrete()) {
    std::vector<double> probs(range.labels.size(), 1.0);
    for (const auto& d : densities)
      for (std::size_t k = 0; k < probs.size(); ++k) probs[k] *= d.pmf()[k];
    double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (!(total > 0.0))
      throw ContradictionError("fused evidence assigns zero probability to every label");
    for (auto& p : probs) p /= total;
    return DensityAccess::raw_pmf(range, std::move(probs));
  }

  std::vector<Cell> cells(densities.front().cells().begin(),
                          densities.front().cells().end());
  for (std::size_t k = 1; k < densities.size() && !cells.empty(); ++k)
    cells = multiply_cells(cells, densities[k].cells());

  std::set<double> sites;
  for (const auto& d : densities)
    for (const auto& a : d.atoms()) sites.insert(a.x);
  std::vector<Atom> atoms;
  for (double x : sites) {
    double w = 1.0;
    for (const auto& d : densities) {
      double m = d.atom_mass_at(x);
      w *= m > 0.0 ? m : d.height_at(x);
      if (w == 0.0) break;
    }
    if (w > 0.0) atoms.push_back({x, w});
  }

  double total = 0.0;
  for (const auto& a : atoms) total += a.mass;
  for (const auto& c : cells) total += c.mass();
  if (!(total > 0.0) || !std::isfinite(total))
    throw ContradictionError("fused evidence has disjoint supports");
  for (auto& a : atoms) a.mass /= total;
  for (auto& c : cells) c.height /= total;
  return DensityAccess::raw(range, std::move(atoms), merge_cells(std::move(cells)));
}

std::optional<std::string> partition_defect(
    std::span<const PartitionEntry> partition, const Range& source) {
  if (!source.is_cardinal()) return "threshold source must be cardinal";
  std::vector<Interval> all;
  for (const auto& e : partition) {
    if (e.set.is_labels()) return "partition entry '" + e.label + "' is not an interval set";
    for (const auto& iv : e.set.intervals()) all.push_back(iv);
  }
  if (all.empty()) return "partition is empty";
  std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.lo_closed && !b.lo_closed;
  });
  std::ostringstream os;
  for (const auto& iv : all) {
    if (iv.lo < source.lower || iv.hi > source.upper) {
      os << "partition interval [" << iv.lo << ", " << iv.hi
         << "] exceeds the source range";
      return os.str();
    }
  }
  if (all.front().lo != source.lower || !all.front().lo_closed) {
    os << "partition does not cover the lower bound " << source.lower;
    return os.str();
  }
  if (all.back().hi != source.upper || !all.back().hi_closed) {
    os << "partition does not cover the upper bound " << source.upper;
    return os.str();
  }
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto& a = all[i - 1];
    const auto& b = all[i];
    if (a.hi > b.lo || (a.hi == b.lo && a.hi_closed && b.lo_closed)) {
      os << "partition intervals overlap at " << b.lo;
      return os.str();
    }
    if (a.hi < b.lo || (a.hi == b.lo && !a.hi_closed && !b.lo_closed)) {
      os << "partition leaves a gap between " << a.hi << " and " << b.lo;
      return os.str();
    }
  }
  return std::nullopt;
}

Density threshold_map(const Density& f,
                      std::span<const PartitionEntry> partition,
                      const Range& out_range) {
  require_valid(out_range);
  if (f.is_discrete()) throw RangeError("threshold source must be cardinal");
  if (!out_range.is_discrete())
    throw RangeError("threshold output must be categorical or ordinal");
  if (auto d = partition_defect(partition, f.range())) throw ArgumentError(*d);
  std::vector<double> probs(out_range.labels.size(), 0.0);
  for (const auto& e : partition) {
    auto idx = out_range.label_index(e.label);
    if (!idx) throw RangeError("partition label '" + e.label + "' not in output range");
    probs[*idx] += prob_in(f, e.set);
  }
  return DensityAccess::raw_pmf(out_range, std::move(probs));
}

Density mixture(std::span<const double> weights,
                std::span<const Density> densities) {
  if (weights.size() != densities.size() || densities.empty())
    throw ArgumentError("mixture needs one weight per density");
  double wsum = 0.0;
  for (double w : weights) {
    if (!is_finite_nonneg(w)) throw ArgumentError("mixture weights must be non-negative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw ArgumentError("mixture weights must sum to 1");
  require_same_domain(densities);
  const Range& range = densities.front().range();

  if (range.is_discrete()) {
    std::vector<double> probs(range.labels.size(), 0.0);
    for (std::size_t i = 0; i < densities.size(); ++i)
      for (std::size_t k = 0; k < probs.size(); ++k)
        probs[k] += weights[i] * densities[i].pmf()[k];
    return Density::from_pmf(range, std::move(probs));
  }
  std::vector<Atom> atoms;
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (weights[i] == 0.0) continue;
    for (const auto& a : densities[i].atoms())
      atoms.push_back({a.x, a.mass * weights[i]});
    for (const auto& c : densities[i].cells())
      cells.push_back({c.lo, c.hi, c.height * weights[i]});
  }
  return Density::from_parts(range, std::move(atoms), std::move(cells));
}

}  // namespace naive
