#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "v2x/geometry/occupancy_grid.hpp"
#include "v2x/model/agent_model.hpp"
#include "v2x/model/types.hpp"

namespace v2x {

// Query set living on a tape. scores is N x 1; logits is valid only for sets
// decoded by this agent's own heads.
struct QueryVars {
  QueryKind kind = QueryKind::track;
  std::uint32_t agent = 0;
  ad::Var queries;
  ad::Var refs;  // N x 2
  ad::Var scores;
  ad::Var logits;

  std::size_t count() const { return queries.rows(); }
};

QueryVars constant_queries(ad::Tape& tape, const QuerySet& qs);
QuerySet snapshot(const QueryVars& qv);

// tokens <- MoE(CrossAttn(SelfAttn(tokens), context)), residual around both attentions. The routing trace is
// appended to traces when given.
ad::Var encoder_layer(ad::Tape& tape, const EncoderLayer& layer, const ad::Var& tokens,
                      const ad::Var& context, std::vector<MoeTrace>* traces = nullptr);

struct EncoderTrace {
  ad::Var tokens;
  ad::Var balance;  // sum of per-layer balance losses
  std::vector<RoutingStats> routing;
};

EncoderTrace run_encoder(ad::Tape& tape, const std::vector<EncoderLayer>& layers,
                         const ad::Var& tokens, const ad::Var& context);

// Sensor rows projected to model width.
ad::Var sensor_context(ad::Tape& tape, const AgentModel& model, const Matrix& features);
ad::Var initial_bev(ad::Tape& tape, const AgentModel& model);

struct HeadsTrace {
  QueryVars track;
  QueryVars map;
  ad::Var occ_logits;  // (H*W) x 1
};

HeadsTrace perception_heads(ad::Tape& tape, const AgentModel& model, const ad::Var& bev_tokens);
// Refs, logits and scores from the track or map heads for the given queries.
QueryVars decode_heads(ad::Tape& tape, const AgentModel& model, QueryKind kind,
                       const ad::Var& queries);
OccupancyGrid occupancy_from_logits(const AgentModel& model, const Matrix& logits);

struct MotionTrace {
  QueryVars motion;       // (A*M) rows, refs are the agent anchors
  ad::Var positions;      // (A*M) x 2T absolute waypoints, x/y interleaved
  ad::Var mode_probs;     // (A*M) x 1
  std::vector<std::size_t> track_rows;  // track row forecast by each agent
  Matrix anchors;         // A x 2
  ad::Var balance;
  std::vector<RoutingStats> routing;
  std::size_t agents = 0;
};

// The top motion_agents track rows by score (ties to the lower row) are forecast.
MotionTrace motion_decoder(ad::Tape& tape, const AgentModel& model, const QueryVars& tracks,
                           const ad::Var& bev_tokens);
// Waypoints from mode queries: anchor + cumulative sum of decoded offsets.
ad::Var decode_positions(ad::Tape& tape, const AgentModel& model, const ad::Var& queries,
                         const ad::Var& anchors_per_row);
ad::Var decode_mode_probs(ad::Tape& tape, const AgentModel& model, const ad::Var& queries,
                          std::size_t agents);
TrajectorySet to_trajectories(const Matrix& positions, const Matrix& mode_probs,
                              std::size_t agents, std::size_t modes, std::size_t steps);

// plan_steps x 2 waypoints in the ego frame, accumulated from the origin.
ad::Var planner_head(ad::Tape& tape, const AgentModel& model, const ad::Var& motion_queries);

// Plain-value entry points.
BevState encoder_layer(const BevState& state, const Matrix& context, const EncoderLayer& layer,
                       RoutingStats* stats = nullptr);
std::pair<BevState, double> run_encoder(const BevState& state, const Matrix& context,
                                        const std::vector<EncoderLayer>& layers);

struct PerceptionOutput {
  QuerySet track;
  QuerySet map;
  OccupancyGrid occupancy;
};

PerceptionOutput perception_heads(const AgentModel& model, const BevState& state);
std::pair<QuerySet, TrajectorySet> motion_decoder(const AgentModel& model, const QuerySet& tracks,
                                                  const BevState& state);
PointSet2D planner_head(const AgentModel& model, const QuerySet& motion);

}  // namespace v2x
