#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "naive/density.hpp"
#include "naive/range.hpp"
#include "naive/timebase.hpp"

namespace naive {

enum class VariableKind { datum, inference, constant };
std::string_view to_string(VariableKind kind);

/// Time shapes a variable can be evaluated at. Series queries are answered
/// point-wise, so only instants and intervals are declared.
struct ShapeSet {
  bool instant = true;
  bool interval = false;

  bool accepts(TimeShape shape) const;
  bool operator==(const ShapeSet&) const = default;
};

/// Observation-store predicate guarding a ranked-chain branch.
struct Criterion {
  enum class Kind {
    always,       // unconditional
    obs_within,   // >= 1 observation of `datum` within `window` of t
    obs_count,    // >= `min_count` distinct observation times within `window`
    obs_before,   // >= 1 observation of `datum` at or before t
  };
  Kind kind = Kind::always;
  std::string datum;
  Duration window;
  int min_count = 1;

  static Criterion always() { return {}; }
  bool operator==(const Criterion&) const = default;
};

/// Radius given literally or by a constant whose density is a delta in a
/// time unit (s, min/m, h, d).
using RadiusTerm = std::variant<Duration, std::string>;

struct Procedure;
struct ChainBranch;

/// Another variable's value, unchanged.
struct RefProc {
  std::string var;
  bool operator==(const RefProc&) const = default;
};

struct ArithProc {
  ArithOp op = ArithOp::add;
  std::string left;
  std::string right;
  bool operator==(const ArithProc&) const = default;
};

struct ThresholdProc {
  std::string source;
  std::vector<PartitionEntry> partition;
  bool operator==(const ThresholdProc&) const = default;
};

/// Nearest observation of `datum` if it lies within `radius`; else the
/// fallback.
struct NearestObsProc {
  std::string datum;
  RadiusTerm radius = Duration::hours(12);
  std::optional<std::string> fallback;
  bool operator==(const NearestObsProc&) const = default;
};

/// Least-squares line through the `n` observations of `datum` nearest the
/// query time within `window`; needs `min_points` distinct times.
struct LinearFitProc {
  std::string datum;
  int n = 10;
  Duration window = Duration::days(30);
  int min_points = 3;
  std::optional<std::string> fallback;
  bool operator==(const LinearFitProc&) const = default;
};

/// base + rate * elapsed * (inflow - outflow), where `base` is the latest
/// observation of a datum at or before the query time and rate is
/// `rate` per `rate_per`.
struct CausalBalanceProc {
  std::string base;
  std::string inflow;
  std::string outflow;
  double rate = 1.0;
  Duration rate_per = Duration::days(1);
  std::optional<std::string> fallback;
  bool operator==(const CausalBalanceProc&) const = default;
};

/// Ordered alternatives; the first branch whose criterion holds is used.
struct RankedChainProc {
  std::vector<ChainBranch> branches;
  bool operator==(const RankedChainProc& other) const;
};

struct BayesFusionProc {
  std::vector<std::string> sources;
  bool operator==(const BayesFusionProc&) const = default;
};

/// Three-label trend of `source` across [t - epsilon, t + epsilon].
struct TrendProc {
  std::string source;
  Duration epsilon = Duration::hours(12);
  double band = 0.0;
  bool operator==(const TrendProc&) const = default;
};

struct Procedure {
  using Node = std::variant<RefProc, ArithProc, ThresholdProc, NearestObsProc,
                            LinearFitProc, CausalBalanceProc, RankedChainProc,
                            BayesFusionProc, TrendProc>;
  Node node;

  std::string_view kind_name() const;
  bool operator==(const Procedure&) const = default;
};

struct ChainBranch {
  Procedure procedure;
  Criterion criterion;
  bool operator==(const ChainBranch&) const = default;
};

inline bool RankedChainProc::operator==(const RankedChainProc& other) const {
  return branches == other.branches;
}

inline constexpr std::string_view kTrendLabels[] = {"decreasing", "stable",
                                                    "increasing"};

struct VariableDef {
  std::string name;
  VariableKind kind = VariableKind::datum;
  Range range;
  ShapeSet shapes;
  std::optional<Procedure> procedure;         // inference only
  std::optional<Density> constant_density;    // constant only

  bool operator==(const VariableDef&) const = default;
};

/// Variables in declaration order plus the named ranges they use.
class KnowledgeBase {
 public:
  void add_range(Range range);
  void add(VariableDef def);

  const std::vector<Range>& ranges() const { return ranges_; }
  const std::vector<VariableDef>& variables() const { return variables_; }
  const Range* find_range(std::string_view name) const;
  const VariableDef* find(std::string_view name) const;
  /// Throws UnknownVariableError.
  const VariableDef& at(std::string_view name) const;

  bool operator==(const KnowledgeBase&) const = default;

 private:
  std::vector<Range> ranges_;
  std::vector<VariableDef> variables_;
};

// Programmatic builders.
VariableDef datum(std::string name, Range range, ShapeSet shapes = {});
VariableDef constant(std::string name, Density density);
VariableDef inference(std::string name, Range range, Procedure procedure,
                      ShapeSet shapes = {});

/// Names a procedure reads directly (variables and criterion data).
std::vector<std::string> references(const Procedure& p);
std::vector<std::string> references(const VariableDef& v);

struct KbDiagnostic {
  std::string code;
  std::string variable;
  std::string message;
  bool operator==(const KbDiagnostic&) const = default;
};

/// Diagnostic codes reported by validate.
namespace diag {
inline constexpr std::string_view kUnknownReference = "K001";
inline constexpr std::string_view kCycle = "K002";
inline constexpr std::string_view kDuplicateName = "K003";
inline constexpr std::string_view kOperandKind = "K004";
inline constexpr std::string_view kPartition = "K005";
inline constexpr std::string_view kLabel = "K006";
inline constexpr std::string_view kInvalidRange = "K007";
inline constexpr std::string_view kConstant = "K008";
inline constexpr std::string_view kRangeMismatch = "K009";
inline constexpr std::string_view kTrendRange = "K010";
inline constexpr std::string_view kExpectedDatum = "K011";
inline constexpr std::string_view kRadius = "K012";
inline constexpr std::string_view kParameter = "K013";
inline constexpr std::string_view kShape = "K014";
}  // namespace diag

/// Empty iff the knowledge base is reference-closed, acyclic and
/// range-consistent.
std::vector<KbDiagnostic> validate(const KnowledgeBase& kb);

/// Resolves a radius term against the knowledge base's constants.
/// Throws ArgumentError when the named constant is not a delta in a time
/// unit.
Duration resolve_radius(const KnowledgeBase& kb, const RadiusTerm& radius);

/// Transitive closure of references (downward). Throws UnknownVariableError.
std::set<std::string> dependencies(const KnowledgeBase& kb, std::string_view name);
/// Transitive closure of referrers (upward): the invalidation set of `name`.
std::set<std::string> dependents(const KnowledgeBase& kb, std::string_view name);

}  // namespace naive
