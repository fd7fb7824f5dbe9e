#include "naive/kb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>

#include "naive/error.hpp"

namespace naive {

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::datum: return "datum";
    case VariableKind::inference: return "inference";
    case VariableKind::constant: return "constant";
  }
  return "?";
}

bool ShapeSet::accepts(TimeShape shape) const {
  switch (shape) {
    case TimeShape::instant: return instant;
    case TimeShape::interval: return interval;
    case TimeShape::series: return instant;
  }
  return false;
}

std::string_view Procedure::kind_name() const {
  static constexpr std::string_view names[] = {
      "ref", "arith", "threshold", "nearest_obs", "linear_fit",
      "causal_balance", "chain", "fuse", "trend"};
  return names[node.index()];
}

void KnowledgeBase::add_range(Range range) { ranges_.push_back(std::move(range)); }

void KnowledgeBase::add(VariableDef def) { variables_.push_back(std::move(def)); }

const Range* KnowledgeBase::find_range(std::string_view name) const {
  for (const auto& r : ranges_)
    if (r.name == name) return &r;
  return nullptr;
}

const VariableDef* KnowledgeBase::find(std::string_view name) const {
  for (const auto& v : variables_)
    if (v.name == name) return &v;
  return nullptr;
}

const VariableDef& KnowledgeBase::at(std::string_view name) const {
  if (const auto* v = find(name)) return *v;
  throw UnknownVariableError("unknown variable '" + std::string(name) + "'");
}

VariableDef datum(std::string name, Range range, ShapeSet shapes) {
  VariableDef v;
  v.name = std::move(name);
  v.kind = VariableKind::datum;
  v.range = std::move(range);
  v.shapes = shapes;
  return v;
}

VariableDef constant(std::string name, Density density) {
  VariableDef v;
  v.name = std::move(name);
  v.kind = VariableKind::constant;
  v.range = density.range();
  v.shapes = {true, true};
  v.constant_density = std::move(density);
  return v;
}

VariableDef inference(std::string name, Range range, Procedure procedure,
                      ShapeSet shapes) {
  VariableDef v;
  v.name = std::move(name);
  v.kind = VariableKind::inference;
  v.range = std::move(range);
  v.shapes = shapes;
  v.procedure = std::move(procedure);
  return v;
}

namespace {

void push_unique(std::vector<std::string>& out, const std::string& name) {
  if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
}

void collect(const Procedure& p, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, RefProc>) {
          push_unique(out, n.var);
        } else if constexpr (std::is_same_v<T, ArithProc>) {
          push_unique(out, n.left);
          push_unique(out, n.right);
        } else if constexpr (std::is_same_v<T, ThresholdProc>) {
          push_unique(out, n.source);
        } else if constexpr (std::is_same_v<T, NearestObsProc>) {
          push_unique(out, n.datum);
          if (const auto* c = std::get_if<std::string>(&n.radius)) push_unique(out, *c);
          if (n.fallback) push_unique(out, *n.fallback);
        } else if constexpr (std::is_same_v<T, LinearFitProc>) {
          push_unique(out, n.datum);
          if (n.fallback) push_unique(out, *n.fallback);
        } else if constexpr (std::is_same_v<T, CausalBalanceProc>) {
          push_unique(out, n.base);
          push_unique(out, n.inflow);
          push_unique(out, n.outflow);
          if (n.fallback) push_unique(out, *n.fallback);
        } else if constexpr (std::is_same_v<T, RankedChainProc>) {
          for (const auto& b : n.branches) {
            collect(b.procedure, out);
            if (b.criterion.kind != Criterion::Kind::always)
              push_unique(out, b.criterion.datum);
          }
        } else if constexpr (std::is_same_v<T, BayesFusionProc>) {
          for (const auto& s : n.sources) push_unique(out, s);
        } else if constexpr (std::is_same_v<T, TrendProc>) {
          push_unique(out, n.source);
        }
      },
      p.node);
}

std::optional<std::int64_t> seconds_per_unit(std::string_view unit) {
  if (unit == "s" || unit == "sec" || unit == "seconds") return 1;
  if (unit == "m" || unit == "min" || unit == "minutes") return 60;
  if (unit == "h" || unit == "hours") return 3600;
  if (unit == "d" || unit == "days") return 86400;
  return std::nullopt;
}

bool instant_only(const Procedure& p) {
  return std::visit(
      [](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NearestObsProc> ||
                      std::is_same_v<T, LinearFitProc> ||
                      std::is_same_v<T, CausalBalanceProc> ||
                      std::is_same_v<T, TrendProc>) {
          return true;
        } else if constexpr (std::is_same_v<T, RankedChainProc>) {
          for (const auto& b : n.branches)
            if (b.criterion.kind != Criterion::Kind::always || instant_only(b.procedure))
              return true;
          return false;
        } else {
          return false;
        }
      },
      p.node);
}

class Validator {
 public:
  explicit Validator(const KnowledgeBase& kb) : kb_(kb) {}

  std::vector<KbDiagnostic> run() {
    std::map<std::string, int> counts;
    for (const auto& v : kb_.variables()) ++counts[v.name];
    for (const auto& [name, n] : counts)
      if (n > 1)
        report(diag::kDuplicateName, name,
               "name declared " + std::to_string(n) + " times");

    for (const auto& v : kb_.variables()) check_variable(v);
    check_cycles();
    return std::move(out_);
  }

 private:
  void report(std::string_view code, const std::string& var, std::string msg) {
    KbDiagnostic d{std::string(code), var, std::move(msg)};
    if (std::find(out_.begin(), out_.end(), d) == out_.end()) out_.push_back(std::move(d));
  }

  void check_variable(const VariableDef& v) {
    current_ = &v;
    if (auto d = range_defect(v.range)) {
      report(diag::kInvalidRange, v.name, *d);
      return;
    }
    switch (v.kind) {
      case VariableKind::datum:
        if (v.procedure)
          report(diag::kParameter, v.name, "a datum cannot have a procedure");
        if (!v.shapes.instant && !v.shapes.interval)
          report(diag::kShape, v.name, "accepts no time shape");
        break;
      case VariableKind::constant:
        if (!v.constant_density) {
          report(diag::kConstant, v.name, "constant has no density");
        } else if (!v.constant_density->range().same_domain(v.range)) {
          report(diag::kConstant, v.name, "density range differs from declared range");
        } else if (auto bad = v.constant_density->invariant_violation()) {
          report(diag::kConstant, v.name, *bad);
        }
        break;
      case VariableKind::inference:
        if (!v.procedure) {
          report(diag::kParameter, v.name, "an inference needs a procedure");
          break;
        }
        if (!v.shapes.instant && !v.shapes.interval)
          report(diag::kShape, v.name, "accepts no time shape");
        if (v.shapes.interval && instant_only(*v.procedure))
          report(diag::kShape, v.name,
                 std::string(v.procedure->kind_name()) +
                     " is evaluated at instants only");
        check_procedure(*v.procedure);
        break;
    }
  }

  // Returns the referenced variable, reporting K001 when it is missing.
  const VariableDef* lookup(const std::string& name) {
    const auto* def = kb_.find(name);
    if (!def)
      report(diag::kUnknownReference, current_->name,
             "reference to undeclared variable '" + name + "'");
    return def;
  }

  // A value-producing reference evaluated at the variable's query times.
  const VariableDef* operand(const std::string& name) {
    const auto* def = lookup(name);
    if (!def) return nullptr;
    const ShapeSet need = current_->shapes;
    if ((need.instant && !def->shapes.instant) ||
        (need.interval && !def->shapes.interval))
      report(diag::kShape, current_->name,
             "'" + name + "' does not accept every time shape of this variable");
    return def;
  }

  void same_range(const std::string& name) {
    const auto* def = operand(name);
    if (def && !def->range.same_domain(current_->range))
      report(diag::kRangeMismatch, current_->name,
             "'" + name + "' has range " + describe(def->range) + ", expected " +
                 describe(current_->range));
  }

  void cardinal_operand(const std::string& name) {
    const auto* def = operand(name);
    if (def && !def->range.is_cardinal())
      report(diag::kOperandKind, current_->name,
             "'" + name + "' must have a cardinal range");
  }

  void datum_ref(const std::string& name, bool value_used) {
    const auto* def = value_used ? operand(name) : lookup(name);
    if (def && def->kind != VariableKind::datum)
      report(diag::kExpectedDatum, current_->name, "'" + name + "' is not a datum");
  }

  void cardinal_output(std::string_view what) {
    if (!current_->range.is_cardinal())
      report(diag::kOperandKind, current_->name,
             std::string(what) + " needs a cardinal output range");
  }

  void fallback(const std::optional<std::string>& f) {
    if (f) same_range(*f);
  }

  void check_procedure(const Procedure& p) {
    std::visit([&](const auto& n) { check(n); }, p.node);
  }

  void check(const RefProc& n) { same_range(n.var); }

  void check(const ArithProc& n) {
    cardinal_operand(n.left);
    cardinal_operand(n.right);
    cardinal_output("arithmetic");
  }

  void check(const ThresholdProc& n) {
    const auto* src = operand(n.source);
    if (current_->range.is_cardinal()) {
      report(diag::kOperandKind, current_->name,
             "threshold needs an ordinal or categorical output range");
      return;
    }
    std::vector<std::string> seen;
    for (const auto& e : n.partition) {
      if (!current_->range.label_index(e.label))
        report(diag::kLabel, current_->name,
               "label '" + e.label + "' is not in " + describe(current_->range));
      if (std::find(seen.begin(), seen.end(), e.label) != seen.end())
        report(diag::kLabel, current_->name, "label '" + e.label + "' repeated");
      seen.push_back(e.label);
    }
    if (!src) return;
    if (!src->range.is_cardinal()) {
      report(diag::kOperandKind, current_->name,
             "threshold source '" + n.source + "' must be cardinal");
      return;
    }
    if (auto d = partition_defect(n.partition, src->range))
      report(diag::kPartition, current_->name, *d);
  }

  void check(const NearestObsProc& n) {
    datum_ref(n.datum, false);
    if (const auto* def = kb_.find(n.datum);
        def && !def->range.same_domain(current_->range))
      report(diag::kRangeMismatch, current_->name,
             "'" + n.datum + "' has a different range");
    if (const auto* c = std::get_if<std::string>(&n.radius)) {
      if (!lookup(*c)) return;
    }
    try {
      resolve_radius(kb_, n.radius);
    } catch (const Error& e) {
      report(diag::kRadius, current_->name, e.what());
    }
    fallback(n.fallback);
  }

  void check(const LinearFitProc& n) {
    datum_ref(n.datum, false);
    if (const auto* def = kb_.find(n.datum);
        def && !def->range.same_domain(current_->range))
      report(diag::kRangeMismatch, current_->name,
             "'" + n.datum + "' has a different range");
    cardinal_output("linear_fit");
    if (n.n < 1) report(diag::kParameter, current_->name, "n must be at least 1");
    if (n.min_points < 2)
      report(diag::kParameter, current_->name, "min_points must be at least 2");
    if (n.min_points > n.n)
      report(diag::kParameter, current_->name, "min_points exceeds n");
    if (n.window < Duration())
      report(diag::kParameter, current_->name, "window must not be negative");
    fallback(n.fallback);
  }

  void check(const CausalBalanceProc& n) {
    datum_ref(n.base, false);
    if (const auto* def = kb_.find(n.base);
        def && !def->range.same_domain(current_->range))
      report(diag::kRangeMismatch, current_->name,
             "'" + n.base + "' has a different range");
    cardinal_operand(n.inflow);
    cardinal_operand(n.outflow);
    cardinal_output("causal_balance");
    if (!std::isfinite(n.rate))
      report(diag::kParameter, current_->name, "rate must be finite");
    if (n.rate_per <= Duration())
      report(diag::kParameter, current_->name, "rate period must be positive");
    fallback(n.fallback);
  }

  void check(const RankedChainProc& n) {
    if (n.branches.empty()) {
      report(diag::kParameter, current_->name, "chain has no branches");
      return;
    }
    if (n.branches.back().criterion.kind != Criterion::Kind::always)
      report(diag::kParameter, current_->name,
             "the last chain branch must be unconditional");
    for (const auto& b : n.branches) {
      const auto& c = b.criterion;
      if (c.kind != Criterion::Kind::always) datum_ref(c.datum, false);
      if (c.window < Duration())
        report(diag::kParameter, current_->name, "criterion window must not be negative");
      if (c.kind == Criterion::Kind::obs_count && c.min_count < 1)
        report(diag::kParameter, current_->name, "criterion count must be at least 1");
      check_procedure(b.procedure);
    }
  }

  void check(const BayesFusionProc& n) {
    if (n.sources.size() < 2)
      report(diag::kParameter, current_->name, "fuse needs at least two sources");
    for (const auto& s : n.sources) same_range(s);
  }

  void check(const TrendProc& n) {
    cardinal_operand(n.source);
    const auto& r = current_->range;
    const bool ok = r.kind == RangeKind::ordinal && r.labels.size() == 3 &&
                    std::equal(r.labels.begin(), r.labels.end(), std::begin(kTrendLabels));
    if (!ok)
      report(diag::kTrendRange, current_->name,
             "trend range must be ordinal {decreasing < stable < increasing}");
    if (n.epsilon <= Duration())
      report(diag::kParameter, current_->name, "epsilon must be positive");
    if (!(n.band >= 0.0) || !std::isfinite(n.band))
      report(diag::kParameter, current_->name, "band must be finite and non-negative");
  }

  void check_cycles() {
    // Iterative three-colour DFS; each back edge reports its cycle once.
    std::map<std::string, int> colour;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& v : kb_.variables()) {
      auto& edges = adj[v.name];
      for (const auto& r : references(v))
        if (kb_.find(r)) edges.push_back(r);
    }
    std::vector<std::string> path;
    std::function<void(const std::string&)> visit = [&](const std::string& u) {
      colour[u] = 1;
      path.push_back(u);
      for (const auto& w : adj[u]) {
        if (colour[w] == 1) {
          auto start = std::find(path.begin(), path.end(), w);
          std::string cyc;
          for (auto it = start; it != path.end(); ++it) cyc += *it + " -> ";
          cyc += w;
          report(diag::kCycle, w, "dependency cycle " + cyc);
        } else if (colour[w] == 0) {
          visit(w);
        }
      }
      path.pop_back();
      colour[u] = 2;
    };
    for (const auto& v : kb_.variables())
      if (colour[v.name] == 0) visit(v.name);
  }

  const KnowledgeBase& kb_;
  const VariableDef* current_ = nullptr;
  std::vector<KbDiagnostic> out_;
};

}  // namespace

std::vector<std::string> references(const Procedure& p) {
  std::vector<std::string> out;
  collect(p, out);
  return out;
}

std::vector<std::string> references(const VariableDef& v) {
  if (!v.procedure) return {};
  return references(*v.procedure);
}

std::vector<KbDiagnostic> validate(const KnowledgeBase& kb) {
  return Validator(kb).run();
}

Duration resolve_radius(const KnowledgeBase& kb, const RadiusTerm& radius) {
  if (const auto* d = std::get_if<Duration>(&radius)) {
    if (*d < Duration()) throw ArgumentError("radius must not be negative");
    return *d;
  }
  const auto& name = std::get<std::string>(radius);
  const auto* def = kb.find(name);
  if (!def) throw UnknownVariableError("unknown radius constant '" + name + "'");
  if (def->kind != VariableKind::constant || !def->constant_density)
    throw ArgumentError("radius '" + name + "' is not a constant");
  const auto& f = *def->constant_density;
  if (!f.range().is_cardinal() || !f.cells().empty() || f.atoms().size() != 1)
    throw ArgumentError("radius '" + name + "' is not a delta");
  auto unit = seconds_per_unit(f.range().unit);
  if (!unit)
    throw ArgumentError("radius '" + name + "' has unit '" + f.range().unit +
                        "', expected s, min, h or d");
  const double secs = f.atoms()[0].x * static_cast<double>(*unit);
  if (secs < 0) throw ArgumentError("radius '" + name + "' is negative");
  return Duration::seconds(static_cast<std::int64_t>(std::llround(secs)));
}

namespace {

std::set<std::string> closure(const std::map<std::string, std::vector<std::string>>& adj,
                              const std::string& start) {
  std::set<std::string> seen;
  std::deque<std::string> queue{start};
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (const auto& w : it->second)
      if (seen.insert(w).second) queue.push_back(w);
  }
  return seen;
}

}  // namespace

std::set<std::string> dependencies(const KnowledgeBase& kb, std::string_view name) {
  kb.at(name);
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& v : kb.variables()) adj[v.name] = references(v);
  return closure(adj, std::string(name));
}

std::set<std::string> dependents(const KnowledgeBase& kb, std::string_view name) {
  kb.at(name);
  std::map<std::string, std::vector<std::string>> rev;
  for (const auto& v : kb.variables())
    for (const auto& r : references(v)) rev[r].push_back(v.name);
  return closure(rev, std::string(name));
}

}  // namespace naive
