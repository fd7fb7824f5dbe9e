#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "naive/density.hpp"
#include "naive/engine.hpp"
#include "naive/kb.hpp"

namespace naive::cli {

enum Exit : int { kOk = 0, kDiagnostics = 1, kUsage = 2, kIo = 3 };

struct RowError {
  int line = 0;
  std::string message;
};

struct ObservationFile {
  std::vector<Observation> observations;
  std::vector<RowError> errors;
};

/// Decodes `exact:<x>`, `range:<lo>,<hi>` or `pmf:{label:w,...}` against the
/// datum's range. Throws naive::Error.
Density decode_value(std::string_view value, const Range& range);

/// Builds an observation of `datum`. Throws naive::Error.
Observation decode_observation(const KnowledgeBase& kb, std::string_view datum,
                               std::string_view time, std::string_view value);

/// Parses a `datum,time,value` CSV; rows that fail to decode are collected
/// with their 1-based line numbers.
ObservationFile parse_observations(std::string_view csv, const KnowledgeBase& kb);

/// Mean, variance and 5/50/95% quantiles for cardinal densities; one line
/// per label otherwise.
std::string summarize(const Density& f);

/// Runs the tool with `args` excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace naive::cli
