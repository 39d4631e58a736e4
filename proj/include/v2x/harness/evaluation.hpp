#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "v2x/metrics/detection.hpp"
#include "v2x/metrics/report.hpp"
#include "v2x/model/loss.hpp"
#include "v2x/model/types.hpp"

namespace v2x {

// Everything the metrics need from one frame of predictions, in the ego frame.
struct EvalPrediction {
  std::vector<Detection> tracks;  // track_id = row
  OccupancyGrid lanes;            // rasterised map predictions per class
  OccupancyGrid crossings;
  OccupancyGrid occupancy;        // binary
  TrajectorySet trajectories;
  PointSet2D anchors;  // one per forecast agent
  PointSet2D plan;
  double bps = 0.0;

  friend bool operator==(const EvalPrediction&, const EvalPrediction&) = default;
};

struct EvalTruth {
  std::vector<AgentTruth> agents;
  OccupancyGrid lanes;
  OccupancyGrid crossings;
  OccupancyGrid occupancy;
  PointSet2D expert_plan;
};

struct EvalSettings {
  double detection_threshold = 0.5;
  std::vector<double> center_thresholds{0.5, 1.0, 2.0, 4.0};
  double near_range = 30.0;
  double far_range = 102.4;
};

// Grid with 1 in every cell containing a point.
OccupancyGrid rasterize(const PointSet2D& points, const OccupancyGrid& layout);

// Detection mAP on centre distance over tracks above the threshold; AMOTA on
// one frame of all tracks; map and occupancy IoU on the grids; motion errors
// after Hungarian matching of anchors to GT centres; planning against GT boxes
// moved along their futures.
MetricsReport compute_metrics(const EvalPrediction& pred, const EvalTruth& gt,
                              const EvalSettings& settings = {});

nlohmann::json to_json(const EvalPrediction& p);
nlohmann::json to_json(const EvalTruth& t);
EvalPrediction prediction_from_json(const nlohmann::json& j);
EvalTruth truth_from_json(const nlohmann::json& j);

}  // namespace v2x
