#pragma once

#include <cstdint>
#include <vector>

#include "v2x/geometry/occupancy_grid.hpp"
#include "v2x/metrics/box.hpp"
#include "v2x/model/model.hpp"

namespace v2x {

enum class MapClass : std::uint8_t { lane = 0, crossing = 1 };

// Map query i predicts lanes for even i and crossings for odd i.
MapClass map_class_of(std::size_t query_index);

struct AgentTruth {
  std::int64_t id = 0;
  Box box;
  Point2 velocity;
  PointSet2D future;  // positions at the forecast steps
};

struct MapElement {
  Point2 position;
  MapClass cls = MapClass::lane;
};

// Ground truth expressed in the ego frame.
struct GroundTruth {
  std::vector<AgentTruth> agents;
  std::vector<MapElement> map;
  OccupancyGrid occupancy;
  PointSet2D expert_plan;
};

struct LossConfig {
  double position_scale = 10.0;  // meters per unit of squared-error distance
};

struct PredictionVars {
  QueryVars track;              // fused rows; the first ego_track_rows come from the ego heads
  std::size_t ego_track_rows = 0;
  ad::Var ego_track_logits;     // ego_track_rows x 1
  QueryVars map;
  ad::Var ego_map_logits;       // map rows x 1
  ad::Var occ_logits;           // cells x 1
  ad::Var motion_positions;     // (A*M) x 2T
  Matrix motion_anchors;        // A x 2
  std::size_t modes = 6;
  ad::Var plan;                 // P x 2
  ad::Var moe;                  // 1 x 1
};

struct LossTrace {
  ad::Var track, map, occ, mot, plan, moe, total;

  LossBreakdown values() const;
};

// L = L_track + L_map + L_occ + L_mot + L_plan + L_moe.
LossTrace joint_loss(ad::Tape& tape, const PredictionVars& pred, const GroundTruth& gt,
                     const LossConfig& config = {});

struct Predictions {
  QuerySet track;
  std::vector<double> ego_track_logits;
  QuerySet map;
  std::vector<double> ego_map_logits;
  std::vector<double> occ_logits;
  TrajectorySet motion;
  PointSet2D motion_anchors;
  PointSet2D plan;
  double moe = 0.0;
};

LossBreakdown joint_loss(const Predictions& pred, const GroundTruth& gt,
                         const LossConfig& config = {});

}  // namespace v2x
