#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "density_access.hpp"
#include "naive/density.hpp"
#include "naive/error.hpp"

namespace naive {

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::add: return "add";
    case ArithOp::sub: return "sub";
    case ArithOp::mul: return "mul";
    case ArithOp::div: return "div";
  }
  return "?";
}

std::optional<ArithOp> parse_arith_op(std::string_view name) {
  if (name == "add") return ArithOp::add;
  if (name == "sub") return ArithOp::sub;
  if (name == "mul") return ArithOp::mul;
  if (name == "div") return ArithOp::div;
  return std::nullopt;
}

namespace {

double ramp2(double t) { return t > 0.0 ? 0.5 * t * t : 0.0; }

// P(X + Y <= z), X ~ U[a, b], Y ~ U[c, d].
double sum_cdf(double z, double a, double b, double c, double d) {
  if (z <= a + c) return 0.0;
  if (z >= b + d) return 1.0;
  double area = ramp2(z - a - c) - ramp2(z - b - c) - ramp2(z - a - d) +
                ramp2(z - b - d);
  return std::clamp(area / ((b - a) * (d - c)), 0.0, 1.0);
}

template <std::size_t N>
std::size_t sorted_breaks(std::array<double, N>& pts, std::size_t n) {
  std::sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n));
  return n;
}

// P(X * Y <= z), X ~ U[a, b] with a >= 0 or b <= 0, Y ~ U[c, d].
// For fixed x, P(xY <= z) is clamp((z/x - c)/wy) when x > 0 and
// clamp((d - z/x)/wy) when x < 0; between kinks it integrates in closed form.
double product_cdf(double z, double a, double b, double c, double d) {
  const double wy = d - c;
  std::array<double, 4> pts{a, b, 0.0, 0.0};
  std::size_t n = 2;
  if (z != 0.0) {
    for (double y : {c, d}) {
      if (y == 0.0) continue;
      double k = z / y;
      if (k > a && k < b) pts[n++] = k;
    }
  }
  n = sorted_breaks(pts, n);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double x1 = pts[i];
    double x2 = pts[i + 1];
    if (!(x2 > x1)) continue;
    double xm = 0.5 * (x1 + x2);
    bool pos = xm > 0.0;
    double q = z / xm;
    double t = pos ? (q - c) / wy : (d - q) / wy;
    if (t <= 0.0) continue;
    if (t >= 1.0) {
      total += x2 - x1;
      continue;
    }
    double lg = z != 0.0 ? z * std::log(x2 / x1) : 0.0;
    total += pos ? (lg - c * (x2 - x1)) / wy : (d * (x2 - x1) - lg) / wy;
  }
  return std::clamp(total / (b - a), 0.0, 1.0);
}

// P(X / Y <= z), X ~ U[a, b], Y ~ U[c, d] with c > 0 or d < 0.
double quotient_cdf(double z, double a, double b, double c, double d) {
  const double wx = b - a;
  std::array<double, 4> pts{c, d, 0.0, 0.0};
  std::size_t n = 2;
  if (z != 0.0) {
    for (double x : {a, b}) {
      double k = x / z;
      if (k > c && k < d) pts[n++] = k;
    }
  }
  n = sorted_breaks(pts, n);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double y1 = pts[i];
    double y2 = pts[i + 1];
    if (!(y2 > y1)) continue;
    double ym = 0.5 * (y1 + y2);
    bool pos = ym > 0.0;
    double t = pos ? (z * ym - a) / wx : (b - z * ym) / wx;
    if (t <= 0.0) continue;
    if (t >= 1.0) {
      total += y2 - y1;
      continue;
    }
    double sq = 0.5 * z * (y2 * y2 - y1 * y1);
    total += pos ? (sq - a * (y2 - y1)) / wx : (b * (y2 - y1) - sq) / wx;
  }
  return std::clamp(total / (d - c), 0.0, 1.0);
}

// P(x / Y <= z) for a fixed x, Y ~ U[c, d] with c > 0 or d < 0.
double atom_quotient_cdf(double z, double x, double c, double d) {
  std::array<double, 3> pts{c, d, 0.0};
  std::size_t n = 2;
  if (z != 0.0) {
    double k = x / z;
    if (k > c && k < d) pts[n++] = k;
  }
  n = sorted_breaks(pts, n);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double ym = 0.5 * (pts[i] + pts[i + 1]);
    if (x / ym <= z) total += pts[i + 1] - pts[i];
  }
  return std::clamp(total / (d - c), 0.0, 1.0);
}

// One independent pair whose image leaves the piecewise-constant family.
struct SmoothPart {
  enum class Kind { sum, product, quotient, atom_quotient };
  Kind kind;
  double a, b, c, d;
  double mass;
  double lo, hi;

  double cdf(double z) const {
    if (z <= lo) return 0.0;
    if (z >= hi) return 1.0;
    switch (kind) {
      case Kind::sum: return sum_cdf(z, a, b, c, d);
      case Kind::product: return product_cdf(z, a, b, c, d);
      case Kind::quotient: return quotient_cdf(z, a, b, c, d);
      case Kind::atom_quotient: return atom_quotient_cdf(z, a, c, d);
    }
    return 0.0;
  }
};

SmoothPart make_part(SmoothPart::Kind kind, double a, double b, double c,
                     double d, double mass) {
  SmoothPart p{kind, a, b, c, d, mass, 0.0, 0.0};
  switch (kind) {
    case SmoothPart::Kind::sum:
      p.lo = a + c;
      p.hi = b + d;
      break;
    case SmoothPart::Kind::product: {
      std::array<double, 4> v{a * c, a * d, b * c, b * d};
      p.lo = *std::min_element(v.begin(), v.end());
      p.hi = *std::max_element(v.begin(), v.end());
      break;
    }
    case SmoothPart::Kind::quotient: {
      std::array<double, 4> v{a / c, a / d, b / c, b / d};
      p.lo = *std::min_element(v.begin(), v.end());
      p.hi = *std::max_element(v.begin(), v.end());
      break;
    }
    case SmoothPart::Kind::atom_quotient:
      p.lo = std::min(a / c, a / d);
      p.hi = std::max(a / c, a / d);
      break;
  }
  return p;
}

double apply(ArithOp op, double x, double y) {
  switch (op) {
    case ArithOp::add: return x + y;
    case ArithOp::sub: return x - y;
    case ArithOp::mul: return x * y;
    case ArithOp::div: return x / y;
  }
  return 0.0;
}

// Cell scaled by a non-zero factor, preserving mass `mass`.
Cell scaled_cell(const Cell& c, double factor, double mass) {
  double lo = c.lo * factor;
  double hi = c.hi * factor;
  if (lo > hi) std::swap(lo, hi);
  return {lo, hi, mass / (hi - lo)};
}

std::vector<Cell> split_at_zero(std::span<const Cell> cells) {
  std::vector<Cell> out;
  out.reserve(cells.size() + 1);
  for (const auto& c : cells) {
    if (c.lo < 0.0 && c.hi > 0.0) {
      out.push_back({c.lo, 0.0, c.height});
      out.push_back({0.0, c.hi, c.height});
    } else {
      out.push_back(c);
    }
  }
  return out;
}

void guard_divisor(const Density& g, const GridPolicy& grid) {
  double hw = g.range().span() * grid.zero_guard_fraction;
  for (const auto& a : g.atoms()) {
    if (a.mass > 0.0 && std::abs(a.x) <= hw)
      throw SingularityError("divisor has mass at zero");
  }
  for (const auto& c : g.cells()) {
    if (c.height > 0.0 && c.lo <= hw && c.hi >= -hw)
      throw SingularityError("divisor support reaches the zero neighborhood");
  }
}

// Fine bins per output cell when a result is rebinned.
constexpr int kFineFactor = 16;
// Extra edges inside a smooth part narrower than a few fine bins.
constexpr int kNarrowSplits = 16;

// Merges fine bins between consecutive `edges` into at most `n` cells. Cell
// edges are the union of n/3 near-uniform edges and n/3 equal-mass edges; a
// fine bin heavier than one quantile step keeps both of its edges. The lower
// half of the mass quantiles is located from the left and the upper half from
// the right so a mirror-symmetric input stays symmetric. Empty bins at either
// end of a cell are trimmed.
std::vector<Cell> coarsen(std::span<const double> bins, std::span<const double> edges, int n) {
  const int nf = static_cast<int>(bins.size());
  const int m = std::max(n / 3 - 1, 1);
  const double g0 = edges.front();
  const double g1 = edges.back();
  auto at = [](auto& v, int i) -> auto& { return v[static_cast<std::size_t>(i)]; };

  std::vector<int> cuts{0, nf};
  for (int k = 1; k < m; ++k) {
    const double x = g0 + (g1 - g0) * k / m;
    auto it = std::lower_bound(edges.begin(), edges.end(), x);
    int i = static_cast<int>(it - edges.begin());
    if (i > 0 && (i > nf || x - edges[static_cast<std::size_t>(i) - 1] < *it - x)) --i;
    cuts.push_back(std::clamp(i, 0, nf));
  }
  std::vector<double> left(static_cast<std::size_t>(nf) + 1, 0.0);
  for (int i = 0; i < nf; ++i) at(left, i + 1) = at(left, i) + at(bins, i);
  std::vector<double> right(static_cast<std::size_t>(nf) + 1, 0.0);
  for (int i = nf; i > 0; --i) at(right, i - 1) = at(right, i) + at(bins, i - 1);
  const double total = left.back();
  int i = 0;
  for (int k = 1; 2 * k <= m; ++k) {
    const double target = total * k / m;
    while (i < nf && at(left, i) < target) ++i;
    cuts.push_back(i);
    if (i > 0 && at(bins, i - 1) > total / m) cuts.push_back(i - 1);
  }
  int j = nf;
  for (int k = 1; 2 * k < m; ++k) {
    const double target = total * k / m;
    while (j > 0 && at(right, j) < target) --j;
    cuts.push_back(j);
    if (j < nf && at(bins, j) > total / m) cuts.push_back(j + 1);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Cell> out;
  out.reserve(cuts.size());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    int b0 = cuts[c];
    int b1 = cuts[c + 1];
    while (b0 < b1 && !(at(bins, b0) > 0.0)) ++b0;
    while (b1 > b0 && !(at(bins, b1 - 1) > 0.0)) --b1;
    if (b0 >= b1) continue;
    const double mass = at(left, b1) - at(left, b0);
    const double lo = edges[static_cast<std::size_t>(b0)];
    const double hi = edges[static_cast<std::size_t>(b1)];
    if (mass > 0.0 && hi > lo) out.push_back({lo, hi, mass / (hi - lo)});
  }
  return out;
}

}  // namespace

ArithResult combine_arith(ArithOp op, const Density& f, const Density& g,
                          const Range& out_range, const GridPolicy& grid) {
  grid.validate();
  require_valid(out_range);
  if (f.is_discrete() || g.is_discrete())
    throw RangeError("arithmetic requires cardinal operands");
  if (!out_range.is_cardinal())
    throw RangeError("arithmetic result range must be cardinal");
  if (op == ArithOp::div) guard_divisor(g, grid);

  std::vector<Atom> atoms;
  std::vector<Cell> cells;
  std::vector<SmoothPart> smooth;
  using Kind = SmoothPart::Kind;

  for (const auto& x : f.atoms())
    for (const auto& y : g.atoms())
      atoms.push_back({apply(op, x.x, y.x), x.mass * y.mass});

  for (const auto& x : f.atoms()) {
    for (const auto& c : g.cells()) {
      double m = x.mass * c.mass();
      switch (op) {
        case ArithOp::add:
          cells.push_back({x.x + c.lo, x.x + c.hi, x.mass * c.height});
          break;
        case ArithOp::sub:
          cells.push_back({x.x - c.hi, x.x - c.lo, x.mass * c.height});
          break;
        case ArithOp::mul:
          if (x.x == 0.0)
            atoms.push_back({0.0, m});
          else
            cells.push_back(scaled_cell(c, x.x, m));
          break;
        case ArithOp::div:
          if (x.x == 0.0)
            atoms.push_back({0.0, m});
          else
            smooth.push_back(make_part(Kind::atom_quotient, x.x, x.x, c.lo, c.hi, m));
          break;
      }
    }
  }

  for (const auto& c : f.cells()) {
    for (const auto& y : g.atoms()) {
      double m = c.mass() * y.mass;
      switch (op) {
        case ArithOp::add:
          cells.push_back({c.lo + y.x, c.hi + y.x, c.height * y.mass});
          break;
        case ArithOp::sub:
          cells.push_back({c.lo - y.x, c.hi - y.x, c.height * y.mass});
          break;
        case ArithOp::mul:
          if (y.x == 0.0)
            atoms.push_back({0.0, m});
          else
            cells.push_back(scaled_cell(c, y.x, m));
          break;
        case ArithOp::div:
          cells.push_back(scaled_cell(c, 1.0 / y.x, m));
          break;
      }
    }
  }

  {
    std::vector<Cell> fcells = op == ArithOp::mul
                                   ? split_at_zero(f.cells())
                                   : std::vector<Cell>(f.cells().begin(), f.cells().end());
    smooth.reserve(smooth.size() + fcells.size() * g.cells().size());
    for (const auto& x : fcells) {
      for (const auto& y : g.cells()) {
        double m = x.mass() * y.mass();
        if (!(m > 0.0)) continue;
        switch (op) {
          case ArithOp::add:
            smooth.push_back(make_part(Kind::sum, x.lo, x.hi, y.lo, y.hi, m));
            break;
          case ArithOp::sub:
            smooth.push_back(make_part(Kind::sum, x.lo, x.hi, -y.hi, -y.lo, m));
            break;
          case ArithOp::mul:
            smooth.push_back(make_part(Kind::product, x.lo, x.hi, y.lo, y.hi, m));
            break;
          case ArithOp::div:
            smooth.push_back(make_part(Kind::quotient, x.lo, x.hi, y.lo, y.hi, m));
            break;
        }
      }
    }
  }

  // Support of the full result, for the overlap check.
  double smin = std::numeric_limits<double>::infinity();
  double smax = -smin;
  for (const auto& a : atoms) {
    if (a.mass <= 0.0) continue;
    smin = std::min(smin, a.x);
    smax = std::max(smax, a.x);
  }
  for (const auto& c : cells) {
    if (c.height <= 0.0) continue;
    smin = std::min(smin, c.lo);
    smax = std::max(smax, c.hi);
  }
  double s0 = std::numeric_limits<double>::infinity();
  double s1 = -s0;
  for (const auto& p : smooth) {
    s0 = std::min(s0, p.lo);
    s1 = std::max(s1, p.hi);
  }
  smin = std::min(smin, s0);
  smax = std::max(smax, s1);
  const double lower = out_range.lower;
  const double upper = out_range.upper;
  if (smax < lower || smin > upper)
    throw RangeError("arithmetic result lies entirely outside the output range");

  double below = 0.0;
  double above = 0.0;

  for (auto& a : atoms) {
    if (a.x < lower) {
      below += a.mass;
      a.mass = 0.0;
    } else if (a.x > upper) {
      above += a.mass;
      a.mass = 0.0;
    }
  }

  std::vector<Cell> kept;
  kept.reserve(cells.size());
  for (const auto& c : cells) {
    if (c.lo < lower) below += c.height * (std::min(c.hi, lower) - c.lo);
    if (c.hi > upper) above += c.height * (c.hi - std::max(c.lo, upper));
    double lo = std::max(c.lo, lower);
    double hi = std::min(c.hi, upper);
    if (hi > lo) kept.push_back({lo, hi, c.height});
  }

  kept = merge_cells(std::move(kept));
  if (!smooth.empty() || static_cast<int>(kept.size()) > grid.resolution) {
    double g0 = std::numeric_limits<double>::infinity();
    double g1 = -g0;
    for (const auto& c : kept) {
      g0 = std::min(g0, c.lo);
      g1 = std::max(g1, c.hi);
    }
    if (!smooth.empty()) {
      g0 = std::min(g0, std::max(s0, lower));
      g1 = std::max(g1, std::min(s1, upper));
    }
    if (g1 > g0) {
      // Uniform fine edges plus the ends of every part, so exact cells bin
      // without smearing and narrow smooth parts keep their shape.
      const int nu = kFineFactor * grid.resolution;
      const double dz = (g1 - g0) / nu;
      std::vector<double> edges;
      edges.reserve(static_cast<std::size_t>(nu) + 2 * kept.size() + 4 * smooth.size());
      for (int i = 0; i < nu; ++i) edges.push_back(g0 + i * dz);
      edges.push_back(g1);
      auto add_edge = [&](double x) {
        if (x > g0 && x < g1) edges.push_back(x);
      };
      for (const auto& c : kept) {
        add_edge(c.lo);
        add_edge(c.hi);
      }
      for (const auto& p : smooth) {
        add_edge(p.lo);
        add_edge(p.hi);
        if (p.hi - p.lo < 4 * dz)
          for (int k = 1; k < kNarrowSplits; ++k)
            add_edge(p.lo + (p.hi - p.lo) * k / kNarrowSplits);
      }
      std::sort(edges.begin(), edges.end());
      const double tiny = 1e-12 * (g1 - g0);
      edges.erase(std::unique(edges.begin(), edges.end(),
                              [&](double a, double b) { return b - a <= tiny; }),
                  edges.end());
      edges.back() = g1;
      const int nf = static_cast<int>(edges.size()) - 1;
      std::vector<double> bins(static_cast<std::size_t>(nf), 0.0);
      auto edge = [&](int i) { return edges[static_cast<std::size_t>(i)]; };
      auto first_bin = [&](double x) {
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        return std::clamp(static_cast<int>(it - edges.begin()) - 2, 0, nf - 1);
      };
      for (const auto& p : smooth) {
        double f0 = p.cdf(g0);
        double f1 = p.cdf(g1);
        below += p.mass * f0;
        above += p.mass * (1.0 - f1);
        int i0 = first_bin(p.lo);
        double prev = i0 == 0 ? f0 : p.cdf(edge(i0));
        for (int i = i0; i < nf; ++i) {
          double cur = (i + 1 == nf) ? f1 : p.cdf(edge(i + 1));
          bins[static_cast<std::size_t>(i)] += p.mass * (cur - prev);
          prev = cur;
          if (edge(i) > p.hi) break;
        }
      }
      for (const auto& c : kept) {
        for (int i = first_bin(c.lo); i < nf; ++i) {
          double e0 = edge(i);
          if (e0 >= c.hi) break;
          double lo = std::max(e0, c.lo);
          double hi = std::min(edge(i + 1), c.hi);
          if (hi > lo) bins[static_cast<std::size_t>(i)] += c.height * (hi - lo);
        }
      }
      kept = coarsen(bins, edges, grid.resolution);
    } else {
      kept.clear();
      for (const auto& p : smooth) {
        if (p.hi <= lower)
          below += p.mass;
        else
          above += p.mass;
      }
    }
  }

  if (below > 0.0) atoms.push_back({lower, below});
  if (above > 0.0) atoms.push_back({upper, above});
  std::erase_if(atoms, [](const Atom& a) { return !(a.mass > 0.0); });

  Density out = Density::from_parts(out_range, std::move(atoms), std::move(kept));
  return {std::move(out), below + above};
}

}  // namespace naive
