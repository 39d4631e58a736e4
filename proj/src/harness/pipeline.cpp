#include "v2x/harness/pipeline.hpp"

#include <cmath>
#include <limits>
#include <set>


namespace v2x {

namespace {

constexpr std::uint32_t kInfraId = 1;

QuerySet received(const std::vector<V2XMessage>& msgs, PayloadKind kind, QueryKind qk,
                  std::size_t dim) {
  for (const auto& m : msgs)
    if (m.kind == kind) return decode_queries(m);
  return empty_queries(qk, dim, kInfraId);
}

OccupancyGrid received_grid(const std::vector<V2XMessage>& msgs) {
  for (const auto& m : msgs)
    if (m.kind == PayloadKind::occupancy) return decode_grid(m);
  return {};
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  budget.validate();
  if (model.sensor_features != 10) throw ContractError("sensor_features must be 10 for synthetic scenes");
  if (!(detection_threshold >= 0.0 && detection_threshold <= 1.0)) {
    throw ContractError("detection_threshold must lie in [0, 1]");
  }
  if (!(occ_tau >= 0.0 && occ_tau < 1.0)) throw ContractError("occ_tau must lie in [0, 1)");
  if (!(loss.position_scale > 0.0)) throw ContractError("loss scale must be positive");
}

CooperativeParams make_params(const RunConfig& config, const ScenarioConfig& scenario) {
  config.validate();
  Rng rng(config.seed);
  CooperativeParams p;
  p.ego = make_agent_model(config.model, scenario.ego_range, rng);
  p.infra = make_agent_model(config.model, scenario.infra_range, rng);
  p.fusion = make_fusion_params(config.model.model_dim, config.model.heads,
                                config.model.position_scale, rng);
  return p;
}

std::vector<NamedParameter> trainable_parameters(CooperativeParams& params) {
  std::vector<NamedParameter> out;
  auto add = [&](const std::string& name, Matrix& m) { out.emplace_back(name, &m); };
  visit_parameters(params.ego, "ego", add);
  visit_parameters(params.fusion, "fusion", add);
  return out;
}

PipelineTrace pipeline_forward(ad::Tape& tape, const Scenario& scn, const RunConfig& cfg,
                               const CooperativeParams& params) {
  cfg.validate();
  const AgentModel& ego = params.ego;
  const std::size_t d = cfg.model.model_dim;
  const RigidTransform2D infra_to_ego = scn.infra_to_ego();
  PipelineTrace trace;
  PipelineOutputs& out = trace.outputs;

  // Infrastructure side: its outputs only leave as messages.
  if (cfg.any_fusion()) {
    ad::Tape infra_tape;
    const AgentModel& im = params.infra;
    ad::Var ictx = sensor_context(infra_tape, im, sensor_features(scn, Party::infra, cfg.model.position_scale));
    EncoderTrace ienc = run_encoder(infra_tape, im.encoder, initial_bev(infra_tape, im), ictx);
    HeadsTrace ih = perception_heads(infra_tape, im, ienc.tokens);
    if (cfg.perception_fusion) {
      QuerySet t = snapshot(ih.track);
      t.agent = kInfraId;
      QuerySet m = snapshot(ih.map);
      m.agent = kInfraId;
      out.sent.push_back(encode(t, kInfraId, 0));
      out.sent.push_back(encode(m, kInfraId, 0));
      out.sent.push_back(encode(occupancy_from_logits(im, ih.occ_logits.value()), kInfraId, 0));
    }
    if (cfg.prediction_fusion) {
      MotionTrace imot = motion_decoder(infra_tape, im, ih.track, ienc.tokens);
      QuerySet mq = snapshot(imot.motion);
      mq.agent = kInfraId;
      out.sent.push_back(encode(mq, kInfraId, 0));
    }
    for (auto& m : constrain(out.sent, cfg.budget)) {
      if (m.payload_bytes() > 0) out.delivered.push_back(std::move(m));
    }
  }
  const QuerySet other_track = received(out.delivered, PayloadKind::track, QueryKind::track, d);
  const QuerySet other_map = received(out.delivered, PayloadKind::map, QueryKind::map, d);
  const QuerySet other_motion = received(out.delivered, PayloadKind::motion, QueryKind::motion, d);
  const OccupancyGrid other_occ = received_grid(out.delivered);

  // Ego side.
  ad::Var ctx = sensor_context(tape, ego, sensor_features(scn, Party::ego, cfg.model.position_scale));
  EncoderTrace enc = run_encoder(tape, ego.encoder, initial_bev(tape, ego), ctx);
  HeadsTrace heads = perception_heads(tape, ego, enc.tokens);

  QueryVars tracks = track_fusion(tape, params.fusion, infra_to_ego, heads.track,
                                  constant_queries(tape, other_track));
  QueryVars map = heads.map;
  if (other_map.count() == heads.map.count() && other_map.count() > 0) {
    QueryVars fused = map_fusion(tape, params.fusion, infra_to_ego, heads.map,
                                 constant_queries(tape, other_map));
    map = decode_heads(tape, ego, QueryKind::map, fused.queries);
  }
  const OccupancyGrid ego_occ = occupancy_from_logits(ego, heads.occ_logits.value());
  out.occupancy = occ_fusion(ego_occ, other_occ, infra_to_ego, cfg.occ_tau);

  MotionTrace motion = motion_decoder(tape, ego, tracks, enc.tokens);
  QueryVars fused_motion = traj_fusion(tape, params.fusion, infra_to_ego, motion.motion,
                                       constant_queries(tape, other_motion), tracks);
  const std::size_t ego_rows = motion.agents * cfg.model.modes;
  ad::Var positions = motion.positions;
  ad::Var probs = motion.mode_probs;
  if (ego_rows > 0) {
    ad::Var rows = ad::slice_rows(fused_motion.queries, 0, ego_rows);
    positions = decode_positions(tape, ego, rows, motion.motion.refs);
    probs = decode_mode_probs(tape, ego, rows, motion.agents);
  }
  ad::Var plan = planner_head(tape, ego, fused_motion.queries);

  PredictionVars pv;
  pv.track = tracks;
  pv.ego_track_rows = heads.track.count();
  pv.ego_track_logits = heads.track.logits;
  pv.map = map;
  pv.ego_map_logits = map.logits;
  pv.occ_logits = heads.occ_logits;
  pv.motion_positions = positions;
  pv.motion_anchors = motion.anchors;
  pv.modes = cfg.model.modes;
  pv.plan = plan;
  pv.moe = ad::add(enc.balance, motion.balance);
  trace.loss = joint_loss(tape, pv, ground_truth(scn, ego), cfg.loss);

  out.tracks = snapshot(tracks);
  out.ego_track_rows = heads.track.count();
  out.map = snapshot(map);
  out.motion = snapshot(fused_motion);
  out.trajectories = to_trajectories(positions.value(), probs.value(), motion.agents,
                                     cfg.model.modes, cfg.model.steps);
  out.anchors = motion.anchors.rows() == 0 ? PointSet2D{} : to_points(motion.anchors);
  out.plan = to_points(plan.value());
  out.routing = enc.routing;
  out.routing.insert(out.routing.end(), motion.routing.begin(), motion.routing.end());
  return trace;
}

EvalPrediction eval_prediction(const PipelineOutputs& out, const RunConfig& cfg,
                               const CooperativeParams& params) {
  const OccupancyGrid layout = occupancy_from_logits(
      params.ego, Matrix(cfg.model.bev_height * cfg.model.bev_width, 1));
  EvalPrediction p;
  for (std::size_t i = 0; i < out.tracks.count(); ++i) {
    p.tracks.push_back({Box{out.tracks.refs[i]}, out.tracks.scores[i], static_cast<std::int64_t>(i)});
  }
  PointSet2D lanes, crossings;
  for (std::size_t i = 0; i < out.map.count(); ++i) {
    if (out.map.scores[i] < cfg.detection_threshold) continue;
    (map_class_of(i) == MapClass::lane ? lanes : crossings).push_back(out.map.refs[i]);
  }
  p.lanes = rasterize(lanes, layout);
  p.crossings = rasterize(crossings, layout);
  p.occupancy = out.occupancy.binary;
  p.trajectories = out.trajectories;
  p.anchors = out.anchors;
  p.plan = out.plan;
  p.bps = bps(out.delivered, cfg.budget.frequency_hz);
  return p;
}

EvalTruth eval_truth(const Scenario& scn, const AgentModel& ego) {
  const GroundTruth gt = ground_truth(scn, ego);
  EvalTruth t;
  t.agents = gt.agents;
  PointSet2D lanes, crossings;
  for (const auto& m : gt.map) (m.cls == MapClass::lane ? lanes : crossings).push_back(m.position);
  t.lanes = rasterize(lanes, gt.occupancy);
  t.crossings = rasterize(crossings, gt.occupancy);
  t.occupancy = gt.occupancy;
  t.expert_plan = gt.expert_plan;
  return t;
}

EvalSettings eval_settings(const RunConfig& cfg, const AgentModel& ego) {
  EvalSettings s;
  s.detection_threshold = cfg.detection_threshold;
  s.far_range = ego.range.max_x - ego.range.min_x;
  return s;
}

MetricsReport evaluate(const Scenario& scn, const RunConfig& cfg, const CooperativeParams& params,
                       const PipelineOutputs& out) {
  return compute_metrics(eval_prediction(out, cfg, params), eval_truth(scn, params.ego),
                         eval_settings(cfg, params.ego));
}

RunResult run_pipeline(const Scenario& scn, const RunConfig& cfg, const CooperativeParams& params) {
  ad::Tape tape;
  PipelineTrace t = pipeline_forward(tape, scn, cfg, params);
  RunResult r;
  r.loss = t.loss.values();
  r.outputs = std::move(t.outputs);
  r.report = evaluate(scn, cfg, params, r.outputs);
  return r;
}

nlohmann::json to_json(const RunConfig& c) {
  const ModelConfig& m = c.model;
  nlohmann::json cap = std::isfinite(c.budget.bytes_per_second)
                           ? nlohmann::json(c.budget.bytes_per_second)
                           : nlohmann::json(nullptr);
  return {{"perception_fusion", c.perception_fusion},
          {"prediction_fusion", c.prediction_fusion},
          {"seed", c.seed},
          {"detection_threshold", c.detection_threshold},
          {"occ_tau", c.occ_tau},
          {"loss_scale", c.loss.position_scale},
          {"budget", {{"bytes_per_second", cap}, {"frequency_hz", c.budget.frequency_hz}}},
          {"model",
           {{"model_dim", m.model_dim},
            {"heads", m.heads},
            {"bev_height", m.bev_height},
            {"bev_width", m.bev_width},
            {"encoder_layers", m.encoder_layers},
            {"decoder_layers", m.decoder_layers},
            {"experts", m.experts},
            {"top_k", m.top_k},
            {"lambda", m.lambda},
            {"expert_hidden", m.expert_hidden},
            {"moe_encoder", m.moe_encoder},
            {"moe_decoder", m.moe_decoder},
            {"track_queries", m.track_queries},
            {"map_queries", m.map_queries},
            {"motion_agents", m.motion_agents},
            {"modes", m.modes},
            {"steps", m.steps},
            {"plan_steps", m.plan_steps},
            {"position_scale", m.position_scale}}}};
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ContractError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ContractError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  reject_unknown(j, {"perception_fusion", "prediction_fusion", "seed", "detection_threshold", "occ_tau",
                     "loss_scale", "budget", "model"},
                 "run config");
  read(j, "perception_fusion", c.perception_fusion);
  read(j, "prediction_fusion", c.prediction_fusion);
  read(j, "seed", c.seed);
  read(j, "detection_threshold", c.detection_threshold);
  read(j, "occ_tau", c.occ_tau);
  read(j, "loss_scale", c.loss.position_scale);
  if (j.contains("budget")) {
    const auto& b = j.at("budget");
    reject_unknown(b, {"bytes_per_second", "frequency_hz"}, "budget");
    if (b.contains("bytes_per_second") && !b.at("bytes_per_second").is_null()) {
      c.budget.bytes_per_second = b.at("bytes_per_second").get<double>();
    }
    read(b, "frequency_hz", c.budget.frequency_hz);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    ModelConfig& mc = c.model;
    reject_unknown(m, {"model_dim", "heads", "bev_height", "bev_width", "encoder_layers",
                       "decoder_layers", "experts", "top_k", "lambda", "expert_hidden", "moe_encoder",
                       "moe_decoder", "track_queries", "map_queries", "motion_agents", "modes", "steps",
                       "plan_steps", "position_scale"},
                   "model");
    read(m, "model_dim", mc.model_dim);
    read(m, "heads", mc.heads);
    read(m, "bev_height", mc.bev_height);
    read(m, "bev_width", mc.bev_width);
    read(m, "encoder_layers", mc.encoder_layers);
    read(m, "decoder_layers", mc.decoder_layers);
    read(m, "experts", mc.experts);
    read(m, "top_k", mc.top_k);
    read(m, "lambda", mc.lambda);
    read(m, "expert_hidden", mc.expert_hidden);
    read(m, "moe_encoder", mc.moe_encoder);
    read(m, "moe_decoder", mc.moe_decoder);
    read(m, "track_queries", mc.track_queries);
    read(m, "map_queries", mc.map_queries);
    read(m, "motion_agents", mc.motion_agents);
    read(m, "modes", mc.modes);
    read(m, "steps", mc.steps);
    read(m, "plan_steps", mc.plan_steps);
    read(m, "position_scale", mc.position_scale);
  }
  c.validate();
  return c;
}

}  // namespace v2x
