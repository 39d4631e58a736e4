#include "v2x/geometry/occupancy_grid.hpp"

#include <cmath>

namespace v2x {

OccupancyGrid OccupancyGrid::zeros(std::size_t rows, std::size_t cols, double cell_size,
                                   Point2 origin) {
  OccupancyGrid g;
  g.rows = rows;
  g.cols = cols;
  g.cell_size = cell_size;
  g.origin = origin;
  g.probs.assign(rows * cols, 0.0);
  return g;
}

OccupancyGrid OccupancyGrid::centered(std::size_t rows, std::size_t cols, double cell_size) {
  return zeros(rows, cols, cell_size,
               {-0.5 * static_cast<double>(rows) * cell_size,
                -0.5 * static_cast<double>(cols) * cell_size});
}

Point2 OccupancyGrid::cell_center(std::size_t i, std::size_t j) const {
  return {origin.x + (static_cast<double>(i) + 0.5) * cell_size,
          origin.y + (static_cast<double>(j) + 0.5) * cell_size};
}

std::optional<std::pair<std::size_t, std::size_t>> OccupancyGrid::locate(const Point2& p) const {
  const double fi = std::floor((p.x - origin.x) / cell_size);
  const double fj = std::floor((p.y - origin.y) / cell_size);
  if (!(fi >= 0.0 && fj >= 0.0 && fi < static_cast<double>(rows) &&
        fj < static_cast<double>(cols))) {
    return std::nullopt;
  }
  return std::make_pair(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj));
}

bool OccupancyGrid::same_layout(const OccupancyGrid& other) const {
  return rows == other.rows && cols == other.cols && cell_size == other.cell_size &&
         origin == other.origin;
}

OccupancyGrid threshold(const OccupancyGrid& grid, double tau) {
  OccupancyGrid out = grid;
  for (auto& p : out.probs) p = p > tau ? 1.0 : 0.0;
  return out;
}

OccupancyGrid resample(const OccupancyGrid& other, const RigidTransform2D& other_to_target,
                       const OccupancyGrid& target_layout) {
  OccupancyGrid out = OccupancyGrid::zeros(target_layout.rows, target_layout.cols,
                                           target_layout.cell_size, target_layout.origin);
  const RigidTransform2D target_to_other = invert(other_to_target);
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.cols; ++j) {
      if (auto cell = other.locate(target_to_other.apply(out.cell_center(i, j)))) {
        out.at(i, j) = other.at(cell->first, cell->second);
      }
    }
  }
  return out;
}

}  // namespace v2x
