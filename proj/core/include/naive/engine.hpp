#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "naive/density.hpp"
#include "naive/kb.hpp"
#include "naive/timebase.hpp"

namespace naive {

/// A reported value of a datum at an instant or over an interval.
struct Observation {
  std::string datum;
  TimeSpec time;
  Density density;

  bool operator==(const Observation&) const = default;
};

struct EvalOptions {
  GridPolicy grid;
  bool caching = true;
  int max_depth = 64;
  /// Observations assigned probability <= this are contradictions.
  double contradiction_threshold = 0.0;
};

struct Contradiction {
  std::string datum;
  std::string model;
  TimeSpec time;
  Density observed;
  Density inferred;
  double probability = 0.0;
};

/// One evaluation step. Nested chain branches appear as children with an
/// empty variable name.
struct TraceNode {
  std::string variable;
  std::string time;
  std::string step;      // procedure kind, "datum" or "constant"
  int branch = 0;        // 1 primary / 2 fallback, or the chain branch index
  bool cache_hit = false;
  std::string detail;
  std::vector<TraceNode> children;
};

/// Indented text rendering, one line per node.
std::string format_trace(const TraceNode& root);

using CacheKey = std::pair<std::string, TimeSpec>;

/// Observation store, density cache and evaluator for one knowledge base.
/// Any number of evaluate/explain calls may run concurrently; reporting an
/// observation takes exclusive access.
class EvalContext {
 public:
  explicit EvalContext(std::shared_ptr<const KnowledgeBase> kb,
                       EvalOptions options = {});

  const KnowledgeBase& kb() const { return *kb_; }
  const EvalOptions& options() const { return options_; }

  /// Instant or interval queries; series go through evaluate_series.
  Density evaluate(const std::string& name, const TimeSpec& t);
  std::vector<Density> evaluate_series(const std::string& name,
                                       const TimeSeriesSpec& ts);
  std::pair<Density, TraceNode> explain(const std::string& name,
                                        const TimeSpec& t);
  /// Trace of a fresh evaluation that neither reads nor fills the cache.
  std::pair<Density, TraceNode> explain_uncached(const std::string& name,
                                                 const TimeSpec& t);

  /// Observations recorded exactly at `t`, fused when there are several.
  /// Throws MissingDatumError when there are none.
  Density resolve_datum(const std::string& name, const TimeSpec& t);

  Density eval_trend(const TrendProc& spec, TimePoint t, const Range& out_range);

  /// Stores the observation and drops every cached density of its
  /// dependents. Returns the dropped keys.
  std::vector<CacheKey> report_observation(Observation obs);

  /// Evaluates `model` at the observation's time without the observation
  /// and reports a contradiction when it is assigned probability <= the
  /// threshold.
  std::optional<Contradiction> check_consistency(const Observation& obs,
                                                 const std::string& model);

  std::vector<CacheKey> cached_keys() const;
  const std::vector<Observation>& observations(const std::string& datum) const;

 private:
  Density eval(const std::string& name, const TimeSpec& t, int depth,
               TraceNode* trace);
  Density run(const Procedure& p, const VariableDef& def, const TimeSpec& t,
              int depth, TraceNode* trace);
  Density resolve_locked(const std::string& name, const TimeSpec& t) const;
  Density trend_locked(const TrendProc& spec, TimePoint t, const Range& out_range,
                       int depth, TraceNode* trace);
  bool criterion_holds(const Criterion& c, TimePoint t) const;
  std::vector<TimePoint> instants(const std::string& datum) const;
  std::unique_ptr<EvalContext> uncached_copy() const;

  std::shared_ptr<const KnowledgeBase> kb_;
  EvalOptions options_;

  mutable std::shared_mutex store_mutex_;
  std::map<std::string, std::vector<Observation>> store_;

  mutable std::mutex cache_mutex_;
  std::map<CacheKey, Density> cache_;
  std::map<std::string, std::set<std::string>> dependents_;
};

/// Probability the density `model` gives to the observation: mass over the
/// observation's support, with an atom scored by the model's mass plus its
/// density value at that point, capped at 1.
double observation_probability(const Density& model, const Density& observed);

}  // namespace naive
