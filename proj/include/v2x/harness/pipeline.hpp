#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2x/comm/channel.hpp"
#include "v2x/fusion/fusion.hpp"
#include "v2x/harness/evaluation.hpp"
#include "v2x/harness/scenario.hpp"
#include "v2x/metrics/report.hpp"
#include "v2x/numerics/grad_check.hpp"

namespace v2x {

struct RunConfig {
  bool perception_fusion = true;  // track, map and occupancy messages
  bool prediction_fusion = true;  // motion messages
  ModelConfig model;
  ChannelBudget budget;
  std::uint64_t seed = 0;  // parameter initialisation
  double detection_threshold = 0.5;
  double occ_tau = kOccupancyThreshold;
  LossConfig loss;

  void validate() const;
  bool any_fusion() const { return perception_fusion || prediction_fusion; }
};

// Ego and infrastructure stacks plus the ego-side fusion weights.
struct CooperativeParams {
  AgentModel ego;
  AgentModel infra;
  FusionParams fusion;
};

CooperativeParams make_params(const RunConfig& config, const ScenarioConfig& scenario = {});

template <class Self, class F>
  requires ParameterOwner<Self, CooperativeParams>
void visit_parameters(Self& p, const std::string& prefix, F&& fn) {
  const std::string base = prefix.empty() ? "" : prefix + ".";
  visit_parameters(p.ego, base + "ego", fn);
  visit_parameters(p.infra, base + "infra", fn);
  visit_parameters(p.fusion, base + "fusion", fn);
}

// Parameters that receive gradients: the infrastructure stack only reaches the
// ego through transmitted bytes.
std::vector<NamedParameter> trainable_parameters(CooperativeParams& params);

struct PipelineOutputs {
  QuerySet tracks;  // fused: ego rows then received rows
  std::size_t ego_track_rows = 0;
  QuerySet map;
  FusedOccupancy occupancy;
  QuerySet motion;  // fused motion queries
  TrajectorySet trajectories;  // ego forecasts decoded from fused motion queries
  PointSet2D anchors;
  PointSet2D plan;
  std::vector<V2XMessage> sent;       // before the channel
  std::vector<V2XMessage> delivered;  // after the channel, empty messages dropped
  std::vector<RoutingStats> routing;  // ego encoder layers then decoder layers

  friend bool operator==(const PipelineOutputs&, const PipelineOutputs&) = default;
};

struct PipelineTrace {
  LossTrace loss;
  PipelineOutputs outputs;
};

PipelineTrace pipeline_forward(ad::Tape& tape, const Scenario& scn, const RunConfig& cfg,
                               const CooperativeParams& params);

struct RunResult {
  PipelineOutputs outputs;
  MetricsReport report;
  LossBreakdown loss;
};

RunResult run_pipeline(const Scenario& scn, const RunConfig& cfg, const CooperativeParams& params);

EvalPrediction eval_prediction(const PipelineOutputs& out, const RunConfig& cfg,
                               const CooperativeParams& params);
EvalTruth eval_truth(const Scenario& scn, const AgentModel& ego);
EvalSettings eval_settings(const RunConfig& cfg, const AgentModel& ego);

MetricsReport evaluate(const Scenario& scn, const RunConfig& cfg, const CooperativeParams& params,
                       const PipelineOutputs& out);

nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace v2x
