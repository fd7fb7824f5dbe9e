#include "naive/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "naive/error.hpp"

namespace naive {

namespace {

TraceNode* child(TraceNode* t) {
  return t ? &t->children.emplace_back() : nullptr;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

TimePoint require_instant(const TimeSpec& t, std::string_view what) {
  if (const auto* p = std::get_if<TimePoint>(&t)) return *p;
  throw ShapeMismatchError(std::string(what) + " is evaluated at instants only");
}

std::string describe(const Criterion& c) {
  switch (c.kind) {
    case Criterion::Kind::always: return "always";
    case Criterion::Kind::obs_within:
      return "observation of " + c.datum + " within " + c.window.to_string();
    case Criterion::Kind::obs_count:
      return std::to_string(c.min_count) + " observations of " + c.datum +
             " within " + c.window.to_string();
    case Criterion::Kind::obs_before:
      return "observation of " + c.datum + " at or before t";
  }
  return "?";
}

Range bounding_range(double lo, double hi, const std::string& unit) {
  if (!(lo < hi)) hi = lo + 1.0;
  return Range::cardinal(lo, hi, unit);
}

void format_node(const TraceNode& n, int depth, std::ostringstream& os) {
  os << std::string(static_cast<std::size_t>(depth) * 2, ' ');
  if (!n.variable.empty()) os << n.variable << " @ " << n.time << ": ";
  os << n.step;
  if (n.branch > 0) os << " branch (" << n.branch << ")";
  if (n.cache_hit) os << " [cache hit]";
  if (!n.detail.empty()) os << " - " << n.detail;
  os << '\n';
  for (const auto& c : n.children) format_node(c, depth + 1, os);
}

}  // namespace

std::string format_trace(const TraceNode& root) {
  std::ostringstream os;
  format_node(root, 0, os);
  return os.str();
}

double observation_probability(const Density& model, const Density& observed) {
  if (!model.range().same_domain(observed.range()))
    throw RangeError("observation and model ranges differ");
  double p = 0.0;
  if (observed.is_discrete()) {
    for (std::size_t i = 0; i < observed.pmf().size(); ++i)
      if (observed.pmf()[i] > 0.0) p += model.pmf()[i];
    return std::min(p, 1.0);
  }
  for (const auto& a : observed.atoms())
    p += model.atom_mass_at(a.x) + model.height_at(a.x);
  std::vector<Interval> support;
  for (const auto& c : observed.cells()) {
    if (!support.empty() && support.back().hi == c.lo)
      support.back().hi = c.hi;
    else
      support.push_back(Interval::closed(c.lo, c.hi));
  }
  if (!support.empty()) p += prob_in(model, EventSet::of_intervals(std::move(support)));
  return std::min(p, 1.0);
}

EvalContext::EvalContext(std::shared_ptr<const KnowledgeBase> kb, EvalOptions options)
    : kb_(std::move(kb)), options_(options) {
  if (!kb_) throw ArgumentError("evaluation context needs a knowledge base");
  options_.grid.validate();
  if (options_.max_depth < 1) throw ArgumentError("max_depth must be positive");
  for (const auto& v : kb_->variables()) dependents_[v.name] = dependents(*kb_, v.name);
}

Density EvalContext::evaluate(const std::string& name, const TimeSpec& t) {
  std::shared_lock lock(store_mutex_);
  return eval(name, t, 0, nullptr);
}

std::vector<Density> EvalContext::evaluate_series(const std::string& name,
                                                  const TimeSeriesSpec& ts) {
  std::shared_lock lock(store_mutex_);
  std::vector<Density> out;
  out.reserve(ts.points().size());
  for (auto p : ts.points()) out.push_back(eval(name, p, 0, nullptr));
  return out;
}

std::pair<Density, TraceNode> EvalContext::explain(const std::string& name,
                                                   const TimeSpec& t) {
  std::shared_lock lock(store_mutex_);
  TraceNode root;
  Density d = eval(name, t, 0, &root);
  return {std::move(d), std::move(root)};
}

std::pair<Density, TraceNode> EvalContext::explain_uncached(const std::string& name,
                                                            const TimeSpec& t) {
  return uncached_copy()->explain(name, t);
}

std::unique_ptr<EvalContext> EvalContext::uncached_copy() const {
  EvalOptions opts = options_;
  opts.caching = false;
  auto copy = std::make_unique<EvalContext>(kb_, opts);
  std::shared_lock lock(store_mutex_);
  copy->store_ = store_;
  return copy;
}

Density EvalContext::resolve_datum(const std::string& name, const TimeSpec& t) {
  std::shared_lock lock(store_mutex_);
  const auto& def = kb_->at(name);
  if (def.kind != VariableKind::datum)
    throw ArgumentError("'" + name + "' is not a datum");
  return resolve_locked(name, t);
}

Density EvalContext::eval_trend(const TrendProc& spec, TimePoint t,
                                const Range& out_range) {
  std::shared_lock lock(store_mutex_);
  return trend_locked(spec, t, out_range, 0, nullptr);
}

Density EvalContext::resolve_locked(const std::string& name, const TimeSpec& t) const {
  std::vector<Density> hits;
  if (auto it = store_.find(name); it != store_.end())
    for (const auto& o : it->second)
      if (o.time == t) hits.push_back(o.density);
  if (hits.empty())
    throw MissingDatumError("no observation of '" + name + "' at " + to_string(t));
  if (hits.size() == 1) return std::move(hits.front());
  return bayes_fuse(hits);
}

std::vector<TimePoint> EvalContext::instants(const std::string& datum) const {
  std::vector<TimePoint> ts;
  if (auto it = store_.find(datum); it != store_.end())
    for (const auto& o : it->second)
      if (const auto* p = std::get_if<TimePoint>(&o.time))
        if (ts.empty() || ts.back() != *p) ts.push_back(*p);
  return ts;
}

bool EvalContext::criterion_holds(const Criterion& c, TimePoint t) const {
  if (c.kind == Criterion::Kind::always) return true;
  const auto ts = instants(c.datum);
  switch (c.kind) {
    case Criterion::Kind::obs_within:
      return std::any_of(ts.begin(), ts.end(),
                         [&](TimePoint o) { return within_radius(t, o, c.window); });
    case Criterion::Kind::obs_count:
      return std::count_if(ts.begin(), ts.end(), [&](TimePoint o) {
               return within_radius(t, o, c.window);
             }) >= c.min_count;
    case Criterion::Kind::obs_before:
      return !ts.empty() && ts.front() <= t;
    case Criterion::Kind::always:
      break;
  }
  return true;
}

Density EvalContext::eval(const std::string& name, const TimeSpec& t, int depth,
                          TraceNode* trace) {
  if (depth > options_.max_depth)
    throw RecursionLimitError("evaluation of '" + name + "' exceeds depth " +
                              std::to_string(options_.max_depth));
  const auto& def = kb_->at(name);
  const TimeShape shape = shape_of(t);
  if (shape == TimeShape::series)
    throw ShapeMismatchError("series queries are evaluated point by point");
  if (!def.shapes.accepts(shape))
    throw ShapeMismatchError("'" + name + "' does not accept " +
                             std::string(to_string(shape)) + " times");
  if (trace) {
    trace->variable = name;
    trace->time = to_string(t);
  }

  switch (def.kind) {
    case VariableKind::constant:
      if (trace) trace->step = "constant";
      return *def.constant_density;
    case VariableKind::datum:
      if (trace) trace->step = "datum";
      return resolve_locked(name, t);
    case VariableKind::inference:
      break;
  }

  CacheKey key{name, t};
  if (options_.caching) {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      if (trace) {
        trace->step = std::string(def.procedure->kind_name());
        trace->cache_hit = true;
      }
      return it->second;
    }
  }
  Density d = run(*def.procedure, def, t, depth, trace);
  if (options_.caching) {
    std::lock_guard lock(cache_mutex_);
    cache_.try_emplace(std::move(key), d);
  }
  return d;
}

Density EvalContext::run(const Procedure& p, const VariableDef& def,
                         const TimeSpec& t, int depth, TraceNode* trace) {
  if (trace) trace->step = std::string(p.kind_name());
  const int next = depth + 1;

  auto fallback = [&](const std::optional<std::string>& f,
                      const std::string& reason) -> Density {
    if (!f) throw MissingDatumError("'" + def.name + "': " + reason);
    if (trace) {
      trace->children.clear();
      trace->branch = 2;
      trace->detail = reason;
    }
    return eval(*f, t, next, child(trace));
  };

  auto primary = [&](std::string detail) {
    if (trace) {
      trace->branch = 1;
      trace->detail = std::move(detail);
    }
  };

  return std::visit(
      [&](const auto& n) -> Density {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, RefProc>) {
          return eval(n.var, t, next, child(trace));
        } else if constexpr (std::is_same_v<T, ArithProc>) {
          Density l = eval(n.left, t, next, child(trace));
          Density r = eval(n.right, t, next, child(trace));
          auto res = combine_arith(n.op, l, r, def.range, options_.grid);
          if (trace && res.clamped_mass > 0.0)
            trace->detail = "clamped mass " + fmt(res.clamped_mass);
          return std::move(res.density);
        } else if constexpr (std::is_same_v<T, ThresholdProc>) {
          Density src = eval(n.source, t, next, child(trace));
          return threshold_map(src, n.partition, def.range);
        } else if constexpr (std::is_same_v<T, NearestObsProc>) {
          const TimePoint at = require_instant(t, "nearest_obs");
          const Duration radius = resolve_radius(*kb_, n.radius);
          const auto ts = instants(n.datum);
          if (!ts.empty()) {
            const TimePoint near = nearest(ts, at);
            if (within_radius(at, near, radius)) {
              primary("observation at " + near.to_iso());
              if (auto* c = child(trace)) {
                c->variable = n.datum;
                c->time = to_string(TimeSpec(near));
                c->step = "datum";
              }
              return resolve_locked(n.datum, near);
            }
          }
          return fallback(n.fallback, "no observation of " + n.datum + " within " +
                                          radius.to_string());
        } else if constexpr (std::is_same_v<T, LinearFitProc>) {
          const TimePoint at = require_instant(t, "linear_fit");
          std::vector<TimePoint> ts;
          for (auto o : instants(n.datum))
            if (within_radius(at, o, n.window)) ts.push_back(o);
          std::vector<TimePoint> pts;
          if (!ts.empty())
            pts = k_nearest(ts, at, static_cast<std::size_t>(std::max(n.n, 1))).points();
          if (static_cast<int>(pts.size()) < n.min_points)
            return fallback(n.fallback, std::to_string(pts.size()) + " of " +
                                            std::to_string(n.min_points) +
                                            " fit points within " +
                                            n.window.to_string());
          const auto m = static_cast<double>(pts.size());
          std::vector<double> xs, ys;
          double obs_var = 0.0;
          for (auto p : pts) {
            const auto mo = moments(resolve_locked(n.datum, p));
            xs.push_back((p - at).in_days());
            ys.push_back(mo.mean);
            obs_var += mo.variance;
          }
          double xbar = 0.0, ybar = 0.0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            xbar += xs[i];
            ybar += ys[i];
          }
          xbar /= m;
          ybar /= m;
          double sxx = 0.0, sxy = 0.0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - xbar) * (xs[i] - xbar);
            sxy += (xs[i] - xbar) * (ys[i] - ybar);
          }
          const double beta = sxy / sxx;
          const double alpha = ybar - beta * xbar;
          double ss = 0.0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (alpha + beta * xs[i]);
            ss += r * r;
          }
          double spread = std::max(std::sqrt(ss / m), std::sqrt(obs_var / m));
          // Residuals at rounding level mean the points lie on the line.
          if (spread <= 1e-9 * std::max(1.0, std::abs(alpha))) spread = 0.0;
          const Range& r = def.range;
          const double centre = std::clamp(alpha, r.lower, r.upper);
          primary("fit of " + std::to_string(pts.size()) + " points, prediction " +
                  fmt(alpha) + ", spread " + fmt(spread));
          const double half = spread * std::sqrt(3.0);
          const double lo = std::max(r.lower, alpha - half);
          const double hi = std::min(r.upper, alpha + half);
          if (!(half > 0.0) || !(lo < hi)) return make_delta(centre, r);
          return make_uniform(lo, hi, r);
        } else if constexpr (std::is_same_v<T, CausalBalanceProc>) {
          const TimePoint at = require_instant(t, "causal_balance");
          std::optional<TimePoint> base_time;
          for (auto o : instants(n.base))
            if (o <= at) base_time = o;
          if (!base_time)
            return fallback(n.fallback, "no observation of " + n.base + " at or before t");
          Density base = resolve_locked(n.base, *base_time);
          std::optional<Density> in, out;
          try {
            in = eval(n.inflow, t, next, child(trace));
            out = eval(n.outflow, t, next, child(trace));
          } catch (const MissingDatumError& e) {
            return fallback(n.fallback, e.what());
          }
          primary("base " + n.base + " at " + base_time->to_iso());
          const double factor = n.rate * static_cast<double>((at - *base_time).count()) /
                                static_cast<double>(n.rate_per.count());
          if (factor == 0.0) return base;
          const Range& ir = in->range();
          const Range& orr = out->range();
          const Range net_range =
              bounding_range(ir.lower - orr.upper, ir.upper - orr.lower, ir.unit);
          Density net =
              combine_arith(ArithOp::sub, *in, *out, net_range, options_.grid).density;
          const double a = factor * net_range.lower, b = factor * net_range.upper;
          const Range change_range = bounding_range(std::min(a, b), std::max(a, b), {});
          Density change =
              combine_arith(ArithOp::mul, net,
                            make_delta(factor, bounding_range(factor - 1.0, factor + 1.0, {})),
                            change_range, options_.grid)
                  .density;
          auto res = combine_arith(ArithOp::add, base, change, def.range, options_.grid);
          if (trace && res.clamped_mass > 0.0)
            trace->detail += ", clamped mass " + fmt(res.clamped_mass);
          return std::move(res.density);
        } else if constexpr (std::is_same_v<T, RankedChainProc>) {
          for (std::size_t i = 0; i < n.branches.size(); ++i) {
            const auto& b = n.branches[i];
            const bool ok = b.criterion.kind == Criterion::Kind::always ||
                            criterion_holds(b.criterion, require_instant(t, "chain criterion"));
            if (!ok) continue;
            if (trace) {
              trace->branch = static_cast<int>(i) + 1;
              trace->detail = describe(b.criterion);
            }
            return run(b.procedure, def, t, next, child(trace));
          }
          throw MissingDatumError("'" + def.name + "': no chain branch applies");
        } else if constexpr (std::is_same_v<T, BayesFusionProc>) {
          std::vector<Density> ds;
          for (const auto& s : n.sources) ds.push_back(eval(s, t, next, child(trace)));
          return bayes_fuse(ds);
        } else if constexpr (std::is_same_v<T, TrendProc>) {
          return trend_locked(n, require_instant(t, "trend"), def.range, depth, trace);
        }
      },
      p.node);
}

Density EvalContext::trend_locked(const TrendProc& spec, TimePoint t,
                                  const Range& out_range, int depth, TraceNode* trace) {
  if (spec.epsilon <= Duration()) throw ArgumentError("trend epsilon must be positive");
  if (!(spec.band >= 0.0)) throw ArgumentError("trend band must be non-negative");
  if (out_range.labels.size() != 3 ||
      !std::equal(out_range.labels.begin(), out_range.labels.end(),
                  std::begin(kTrendLabels)))
    throw RangeError("trend range must be {decreasing < stable < increasing}");
  if (trace) trace->step = "trend";

  Density before = eval(spec.source, t - spec.epsilon, depth + 1, child(trace));
  Density after = eval(spec.source, t + spec.epsilon, depth + 1, child(trace));
  const Range& sr = before.range();
  if (!sr.is_cardinal()) throw RangeError("trend source must be cardinal");
  const Range dr = Range::cardinal(sr.lower - sr.upper, sr.upper - sr.lower, sr.unit);
  const Density diff = combine_arith(ArithOp::sub, after, before, dr, options_.grid).density;

  const double b = spec.band;
  auto p_of = [&](Interval iv) {
    iv.lo = std::max(iv.lo, dr.lower);
    iv.hi = std::min(iv.hi, dr.upper);
    if (iv.lo > iv.hi || iv.empty()) return 0.0;
    return prob_in(diff, EventSet::of_interval(iv));
  };
  std::vector<double> p = {p_of({dr.lower, -b, true, false}),
                           p_of(Interval::closed(-b, b)),
                           p_of({b, dr.upper, false, true})};
  if (trace) trace->detail = "band " + fmt(b) + ", epsilon " + spec.epsilon.to_string();
  return Density::from_pmf(out_range, std::move(p));
}

std::vector<CacheKey> EvalContext::report_observation(Observation obs) {
  const auto& def = kb_->at(obs.datum);
  if (def.kind != VariableKind::datum)
    throw ArgumentError("'" + obs.datum + "' is not a datum");
  if (!obs.density.range().same_domain(def.range))
    throw RangeError("observation of '" + obs.datum + "' has range " +
                     describe(obs.density.range()) + ", expected " + describe(def.range));
  if (auto bad = obs.density.invariant_violation())
    throw ArgumentError("invalid observation density: " + *bad);
  const TimeShape shape = shape_of(obs.time);
  if (shape == TimeShape::series || !def.shapes.accepts(shape))
    throw ShapeMismatchError("'" + obs.datum + "' does not accept " +
                             std::string(to_string(shape)) + " observations");

  std::unique_lock store_lock(store_mutex_);
  auto& list = store_[obs.datum];
  auto pos = std::upper_bound(
      list.begin(), list.end(), obs.time,
      [](const TimeSpec& t, const Observation& o) { return t < o.time; });
  const std::string datum_name = obs.datum;
  list.insert(pos, std::move(obs));

  std::vector<CacheKey> removed;
  std::lock_guard cache_lock(cache_mutex_);
  const auto& deps = dependents_.at(datum_name);
  for (auto it = cache_.begin(); it != cache_.end();) {
    if (deps.count(it->first.first)) {
      removed.push_back(it->first);
      it = cache_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

std::optional<Contradiction> EvalContext::check_consistency(const Observation& obs,
                                                            const std::string& model) {
  const auto& mdef = kb_->at(model);
  const auto& ddef = kb_->at(obs.datum);
  if (mdef.kind != VariableKind::inference)
    throw ArgumentError("'" + model + "' is not an inference");
  if (!mdef.range.same_domain(ddef.range))
    throw RangeError("'" + model + "' and '" + obs.datum + "' have different ranges");

  auto scratch = uncached_copy();
  if (auto it = scratch->store_.find(obs.datum); it != scratch->store_.end()) {
    auto& list = it->second;
    if (auto pos = std::find(list.begin(), list.end(), obs); pos != list.end())
      list.erase(pos);
  }
  Density inferred = scratch->evaluate(model, obs.time);
  const double p = observation_probability(inferred, obs.density);
  if (p > options_.contradiction_threshold) return std::nullopt;
  return Contradiction{obs.datum, model, obs.time, obs.density, std::move(inferred), p};
}

std::vector<CacheKey> EvalContext::cached_keys() const {
  std::lock_guard lock(cache_mutex_);
  std::vector<CacheKey> keys;
  for (const auto& [k, v] : cache_) keys.push_back(k);
  return keys;
}

const std::vector<Observation>& EvalContext::observations(const std::string& datum) const {
  static const std::vector<Observation> empty;
  std::shared_lock lock(store_mutex_);
  auto it = store_.find(datum);
  return it == store_.end() ? empty : it->second;
}

}  // namespace naive
