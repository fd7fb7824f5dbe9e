#pragma once

#include <string>
#include <string_view>

#include "naive/density.hpp"

namespace naive {

/// {"range": {...}, "atoms": [[x, m], ...], "pieces": [[lo, hi, h], ...]}
/// for cardinal densities, {"range": {...}, "pmf": [[label, p], ...]} for
/// discrete ones. Doubles are written with round-trip precision.
std::string to_json(const Density& f, int indent = -1);
std::string to_json(const Range& r, int indent = -1);

/// Inverse of to_json. Throws ArgumentError on malformed input.
Density density_from_json(std::string_view text);

/// Cardinal: "x,pdf,cdf" rows at `points` evenly spaced abscissae across the
/// range. Discrete: "label,p,cdf" rows in label order.
std::string to_csv(const Density& f, int points = 513);

}  // namespace naive
