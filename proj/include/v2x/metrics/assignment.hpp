#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "v2x/numerics/matrix.hpp"

namespace v2x {

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), ascending row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;  // sum over reported pairs
};

// Minimum-cost one-to-one assignment on a rectangular cost matrix; min(rows, cols)
// pairs are formed. Entries above gate are treated as prohibitively expensive while
// solving and any pair that still costs more than gate is reported unmatched.
Assignment hungarian(const Matrix& cost,
                     double gate = std::numeric_limits<double>::infinity());

}  // namespace v2x
