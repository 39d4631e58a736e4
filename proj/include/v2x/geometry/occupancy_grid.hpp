#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "v2x/geometry/rigid_transform.hpp"

namespace v2x {

// Probability grid in an agent frame. Cell (i, j) covers
// [origin.x + i*cell, origin.x + (i+1)*cell) x [origin.y + j*cell, origin.y + (j+1)*cell);
// values are stored row-major with i as the row index.
struct OccupancyGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size = 1.0;
  Point2 origin{};
  std::vector<double> probs;

  static OccupancyGrid zeros(std::size_t rows, std::size_t cols, double cell_size, Point2 origin);
  // Grid of rows x cols cells centred on the frame origin.
  static OccupancyGrid centered(std::size_t rows, std::size_t cols, double cell_size);

  bool empty() const { return probs.empty(); }
  double& at(std::size_t i, std::size_t j) { return probs[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return probs[i * cols + j]; }
  Point2 cell_center(std::size_t i, std::size_t j) const;
  std::optional<std::pair<std::size_t, std::size_t>> locate(const Point2& p) const;
  bool same_layout(const OccupancyGrid& other) const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

// O(x, y) = 1 where P(x, y) > tau, else 0.
OccupancyGrid threshold(const OccupancyGrid& grid, double tau);

// Nearest-cell resampling of a grid given in another frame into the layout of
// target; other_to_target maps the other frame into the target frame. Target
// cells whose centres fall outside the other grid read probability 0.
OccupancyGrid resample(const OccupancyGrid& other, const RigidTransform2D& other_to_target,
                       const OccupancyGrid& target_layout);

}  // namespace v2x
