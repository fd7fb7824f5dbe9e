#include <charconv>
#include <sstream>

#include "naive/dsl.hpp"

namespace naive {

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string range_body(const Range& r) {
  std::string s;
  if (r.is_cardinal()) {
    s = "cardinal " + num(r.lower) + ".." + num(r.upper);
    if (!r.unit.empty()) s += " unit \"" + r.unit + "\"";
    return s;
  }
  const bool ord = r.kind == RangeKind::ordinal;
  s = ord ? "ordinal {" : "categorical {";
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    if (i) s += ord ? " < " : ", ";
    s += r.labels[i];
  }
  return s + "}";
}

std::string range_ref(const KnowledgeBase& kb, const Range& r) {
  if (!r.name.empty())
    if (const Range* named = kb.find_range(r.name); named && named->same_domain(r))
      return r.name;
  return range_body(r);
}

std::string shapes(const ShapeSet& s) {
  if (s.instant && !s.interval) return "";
  if (s.instant && s.interval) return " @instant|interval";
  if (s.interval) return " @interval";
  return "";
}

std::string interval(const Interval& iv) {
  return std::string(iv.lo_closed ? "[" : "(") + num(iv.lo) + ", " + num(iv.hi) +
         (iv.hi_closed ? "]" : ")");
}

std::string constant_expr(const Density& d) {
  if (d.is_discrete()) {
    std::string s = "pmf{";
    bool first = true;
    for (std::size_t i = 0; i < d.pmf().size(); ++i) {
      if (d.pmf()[i] == 0.0) continue;
      if (!first) s += ", ";
      first = false;
      s += d.range().labels[i] + ": " + num(d.pmf()[i]);
    }
    return s + "}";
  }
  const auto atoms = d.atoms();
  const auto cells = d.cells();
  if (cells.empty() && atoms.size() == 1 && atoms[0].mass == 1.0)
    return "delta(" + num(atoms[0].x) + ")";
  if (atoms.empty() && cells.size() == 1 &&
      cells[0].height == 1.0 / (cells[0].hi - cells[0].lo))
    return "uniform(" + num(cells[0].lo) + ", " + num(cells[0].hi) + ")";
  std::string s = "piecewise{";
  bool first = true;
  for (const auto& a : atoms) {
    if (!first) s += ", ";
    first = false;
    s += "atom " + num(a.x) + ": " + num(a.mass);
  }
  for (const auto& c : cells) {
    if (!first) s += ", ";
    first = false;
    s += "[" + num(c.lo) + ", " + num(c.hi) + "]: " + num(c.height);
  }
  return s + "}";
}

std::string criterion(const Criterion& c) {
  switch (c.kind) {
    case Criterion::Kind::always: return "always";
    case Criterion::Kind::obs_within:
      return "obs_within(" + c.datum + ", " + c.window.to_string() + ")";
    case Criterion::Kind::obs_count:
      return "obs_count(" + c.datum + ", " + c.window.to_string() + ", " +
             std::to_string(c.min_count) + ")";
    case Criterion::Kind::obs_before: return "obs_before(" + c.datum + ")";
  }
  return "always";
}

std::string rate_period(Duration d) {
  for (auto [unit, secs] : {std::pair{"d", 86400}, {"h", 3600}, {"m", 60}, {"s", 1}})
    if (d.count() == secs) return unit;
  return d.to_string();
}

std::string fallback(const std::optional<std::string>& f) {
  return f ? ", else=" + *f : "";
}

std::string procedure(const Procedure& p) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, RefProc>) {
          return n.var;
        } else if constexpr (std::is_same_v<T, ArithProc>) {
          return std::string(to_string(n.op)) + "(" + n.left + ", " + n.right + ")";
        } else if constexpr (std::is_same_v<T, ThresholdProc>) {
          std::string s = "threshold(" + n.source + ") {";
          for (std::size_t i = 0; i < n.partition.size(); ++i) {
            if (i) s += ", ";
            s += n.partition[i].label + ": ";
            const auto& ivs = n.partition[i].set.intervals();
            for (std::size_t k = 0; k < ivs.size(); ++k) {
              if (k) s += " | ";
              s += interval(ivs[k]);
            }
          }
          return s + "}";
        } else if constexpr (std::is_same_v<T, NearestObsProc>) {
          std::string radius = std::holds_alternative<Duration>(n.radius)
                                   ? std::get<Duration>(n.radius).to_string()
                                   : std::get<std::string>(n.radius);
          return "nearest_obs(" + n.datum + ", radius=" + radius + fallback(n.fallback) + ")";
        } else if constexpr (std::is_same_v<T, LinearFitProc>) {
          return "linear_fit(" + n.datum + ", n=" + std::to_string(n.n) +
                 ", window=" + n.window.to_string() +
                 ", min_points=" + std::to_string(n.min_points) + fallback(n.fallback) + ")";
        } else if constexpr (std::is_same_v<T, CausalBalanceProc>) {
          return "causal_balance(base=" + n.base + ", in=" + n.inflow + ", out=" + n.outflow +
                 ", rate=" + num(n.rate) + "/" + rate_period(n.rate_per) +
                 fallback(n.fallback) + ")";
        } else if constexpr (std::is_same_v<T, RankedChainProc>) {
          std::string s = "chain[";
          for (std::size_t i = 0; i < n.branches.size(); ++i) {
            if (i) s += ", ";
            const auto& b = n.branches[i];
            if (b.criterion.kind == Criterion::Kind::always)
              s += procedure(b.procedure);
            else
              s += "(" + procedure(b.procedure) + " if " + criterion(b.criterion) + ")";
          }
          return s + "]";
        } else if constexpr (std::is_same_v<T, BayesFusionProc>) {
          std::string s = "fuse(";
          for (std::size_t i = 0; i < n.sources.size(); ++i) {
            if (i) s += ", ";
            s += n.sources[i];
          }
          return s + ")";
        } else if constexpr (std::is_same_v<T, TrendProc>) {
          return "trend(" + n.source + ", epsilon=" + n.epsilon.to_string() +
                 ", band=" + num(n.band) + ")";
        }
      },
      p.node);
}

}  // namespace

std::string serialize_kb(const KnowledgeBase& kb) {
  std::ostringstream os;
  for (const auto& r : kb.ranges()) os << "range " << r.name << " = " << range_body(r) << '\n';
  if (!kb.ranges().empty() && !kb.variables().empty()) os << '\n';
  for (const auto& v : kb.variables()) {
    const std::string range = range_ref(kb, v.range);
    switch (v.kind) {
      case VariableKind::datum:
        os << "datum " << v.name << " : " << range << shapes(v.shapes) << '\n';
        break;
      case VariableKind::constant:
        os << "const " << v.name << " : " << range << " = "
           << (v.constant_density ? constant_expr(*v.constant_density) : "?") << '\n';
        break;
      case VariableKind::inference:
        os << "infer " << v.name << " : " << range << shapes(v.shapes) << " = "
           << (v.procedure ? procedure(*v.procedure) : "?") << '\n';
        break;
    }
  }
  return os.str();
}

}  // namespace naive
