#pragma once

#include <utility>
#include <vector>

#include "naive/density.hpp"

namespace naive {

// Builds densities from parts that are already canonical, skipping
// normalization. Library-internal.
struct DensityAccess {
  static Density raw(Range range, std::vector<Atom> atoms,
                     std::vector<Cell> cells) {
    Density d;
    d.range_ = std::move(range);
    d.atoms_ = std::move(atoms);
    d.cells_ = std::move(cells);
    return d;
  }

  static Density raw_pmf(Range range, std::vector<double> pmf) {
    Density d;
    d.range_ = std::move(range);
    d.pmf_ = std::move(pmf);
    return d;
  }
};

}  // namespace naive
