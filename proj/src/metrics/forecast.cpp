#include "v2x/metrics/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace v2x {

MotionErrors motion_errors(const TrajectorySet& pred, const std::vector<PointSet2D>& gt,
                           double miss_threshold) {
  if (pred.agents != gt.size()) {
    throw ContractError("motion_errors: " + std::to_string(pred.agents) + " predicted agents vs " +
                        std::to_string(gt.size()) + " ground truth");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (pred.agents == 0) return {nan, nan, nan};
  if (pred.modes == 0) throw ContractError("motion_errors: no modes");
  MotionErrors out;
  for (std::size_t a = 0; a < pred.agents; ++a) {
    if (gt[a].size() != pred.steps) throw ContractError("motion_errors: horizon mismatch");
    double best_ade = std::numeric_limits<double>::infinity();
    double best_fde = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < pred.modes; ++m) {
      double ade = 0.0;
      for (std::size_t t = 0; t < pred.steps; ++t) ade += distance(pred.at(a, m, t), gt[a][t]);
      ade /= static_cast<double>(pred.steps);
      best_ade = std::min(best_ade, ade);
      best_fde = std::min(best_fde, distance(pred.at(a, m, pred.steps - 1), gt[a].back()));
    }
    out.min_ade += best_ade;
    out.min_fde += best_fde;
    out.miss_rate += best_fde > miss_threshold ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(pred.agents);
  out.min_ade /= n;
  out.min_fde /= n;
  out.miss_rate /= n;
  return out;
}

PlanningErrors planning_errors(const PointSet2D& plan, const PointSet2D& expert,
                               const std::vector<std::vector<Box>>& obstacles, EgoExtent ego) {
  constexpr std::size_t kSteps = 6;
  if (plan.size() != kSteps || expert.size() != kSteps) {
    throw ContractError("planning_errors: plans must have 6 waypoints");
  }
  if (!obstacles.empty() && obstacles.size() != kSteps) {
    throw ContractError("planning_errors: obstacles must be given per waypoint");
  }
  std::array<double, kSteps> err{};
  std::array<bool, kSteps> hit{};
  Point2 prev{0.0, 0.0};
  double heading = 0.0;
  for (std::size_t t = 0; t < kSteps; ++t) {
    err[t] = distance(plan[t], expert[t]);
    const double dx = plan[t].x - prev.x, dy = plan[t].y - prev.y;
    if (dx != 0.0 || dy != 0.0) heading = std::atan2(dy, dx);
    prev = plan[t];
    const Box ego_box{plan[t], ego.length, ego.width, heading};
    if (!obstacles.empty()) {
      for (const auto& b : obstacles[t]) hit[t] = hit[t] || boxes_overlap(ego_box, b);
    }
  }
  PlanningErrors out;
  for (std::size_t h = 0; h < 3; ++h) {
    const std::size_t upto = 2 * (h + 1);
    double s = 0.0;
    bool any = false;
    for (std::size_t t = 0; t < upto; ++t) {
      s += err[t];
      any = any || hit[t];
    }
    out.l2[h] = s / static_cast<double>(upto);
    out.collision[h] = any ? 1.0 : 0.0;
  }
  out.l2_avg = (out.l2[0] + out.l2[1] + out.l2[2]) / 3.0;
  out.collision_avg = (out.collision[0] + out.collision[1] + out.collision[2]) / 3.0;
  return out;
}

double grid_iou(const OccupancyGrid& pred, const OccupancyGrid& gt, double range) {
  if (!pred.same_layout(gt)) throw DimensionError("grid_iou: grids differ in layout");
  const double half = 0.5 * range;
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.rows; ++i) {
    for (std::size_t j = 0; j < pred.cols; ++j) {
      const Point2 c = pred.cell_center(i, j);
      if (std::abs(c.x) > half || std::abs(c.y) > half) continue;
      const bool p = pred.at(i, j) > 0.5;
      const bool g = gt.at(i, j) > 0.5;
      inter += (p && g) ? 1 : 0;
      uni += (p || g) ? 1 : 0;
    }
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace v2x
