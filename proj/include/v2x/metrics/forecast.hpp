#pragma once

#include <array>
#include <vector>

#include "v2x/geometry/occupancy_grid.hpp"
#include "v2x/metrics/box.hpp"
#include "v2x/model/types.hpp"

namespace v2x {

struct MotionErrors {
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
};

// Per agent: best-mode average displacement, independently best-mode final
// displacement, miss when every mode ends farther than miss_threshold. Averages
// over agents; NaN everywhere when there are no agents.
MotionErrors motion_errors(const TrajectorySet& pred, const std::vector<PointSet2D>& gt,
                           double miss_threshold = 2.0);

struct PlanningErrors {
  std::array<double, 3> l2{};         // at 1s, 2s, 3s
  double l2_avg = 0.0;
  std::array<double, 3> collision{};  // 0 or 1 per horizon for a single plan
  double collision_avg = 0.0;
};

struct EgoExtent {
  double length = 4.0;
  double width = 1.8;
};

// plan and expert have 6 waypoints at 0.5 s, starting after the ego origin.
// obstacles[t] lists obstacle boxes at waypoint t. The ego box at waypoint t is
// oriented along the segment reaching it.
PlanningErrors planning_errors(const PointSet2D& plan, const PointSet2D& expert,
                               const std::vector<std::vector<Box>>& obstacles,
                               EgoExtent ego = {});

// Intersection over union of the cells above 0.5 whose centers lie inside the
// centered square of side range (meters). Empty union gives 1.
double grid_iou(const OccupancyGrid& pred, const OccupancyGrid& gt, double range);

}  // namespace v2x
