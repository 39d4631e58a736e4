#include "v2x/harness/evaluation.hpp"

#include <cmath>
#include <limits>

#include "v2x/metrics/assignment.hpp"
#include "v2x/metrics/forecast.hpp"
#include "v2x/errors.hpp"

namespace v2x {

OccupancyGrid rasterize(const PointSet2D& points, const OccupancyGrid& layout) {
  OccupancyGrid g = OccupancyGrid::zeros(layout.rows, layout.cols, layout.cell_size, layout.origin);
  for (const Point2& p : points)
    if (auto c = g.locate(p)) g.at(c->first, c->second) = 1.0;
  return g;
}

MetricsReport compute_metrics(const EvalPrediction& pred, const EvalTruth& gt, const EvalSettings& settings) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  MetricsReport r;

  std::vector<Detection> gts, dets;
  for (const auto& a : gt.agents) gts.push_back({a.box, 1.0, a.id});
  for (const auto& d : pred.tracks)
    if (d.score >= settings.detection_threshold) dets.push_back(d);
  r.map = map_score(dets, gts, settings.center_thresholds, MatchCriterion::center_distance);
  r.amota = amota({TrackedFrame{pred.tracks, gts}});

  r.lane_iou = grid_iou(pred.lanes, gt.lanes, settings.far_range);
  r.crossing_iou = grid_iou(pred.crossings, gt.crossings, settings.far_range);
  r.occ_iou_near = grid_iou(pred.occupancy, gt.occupancy, settings.near_range);
  r.occ_iou_far = grid_iou(pred.occupancy, gt.occupancy, settings.far_range);

  const TrajectorySet& traj = pred.trajectories;
  if (pred.anchors.size() != traj.agents) throw ContractError("metrics: one anchor per forecast agent");
  r.min_ade = r.min_fde = r.miss_rate = kNaN;
  if (traj.agents > 0 && !gt.agents.empty()) {
    Matrix cost(traj.agents, gt.agents.size());
    for (std::size_t a = 0; a < traj.agents; ++a)
      for (std::size_t j = 0; j < gt.agents.size(); ++j)
        cost(a, j) = distance(pred.anchors[a], gt.agents[j].box.center);
    const Assignment match = hungarian(cost);
    TrajectorySet matched(match.pairs.size(), traj.modes, traj.steps);
    std::vector<PointSet2D> futures;
    for (std::size_t k = 0; k < match.pairs.size(); ++k) {
      const auto [a, j] = match.pairs[k];
      for (std::size_t m = 0; m < traj.modes; ++m) {
        matched.scores(k, m) = traj.scores(a, m);
        for (std::size_t t = 0; t < traj.steps; ++t) matched.at(k, m, t) = traj.at(a, m, t);
      }
      futures.push_back(gt.agents[j].future);
    }
    const MotionErrors e = motion_errors(matched, futures);
    r.min_ade = e.min_ade;
    r.min_fde = e.min_fde;
    r.miss_rate = e.miss_rate;
  }

  std::vector<std::vector<Box>> obstacles(pred.plan.size());
  for (std::size_t t = 0; t < pred.plan.size(); ++t)
    for (const auto& a : gt.agents) {
      if (t >= a.future.size()) throw ContractError("metrics: GT future shorter than the plan");
      Box b = a.box;
      b.center = a.future[t];
      obstacles[t].push_back(b);
    }
  const PlanningErrors pe = planning_errors(pred.plan, gt.expert_plan, obstacles);
  r.l2 = pe.l2;
  r.collision = pe.collision;
  r.l2_avg = pe.l2_avg;
  r.collision_avg = pe.collision_avg;
  r.bps = pred.bps;
  return r;
}

namespace {

using json = nlohmann::json;

json pt(const Point2& p) { return json::array({p.x, p.y}); }
Point2 pt_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw DecodeError("expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}
json pts(const PointSet2D& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(pt(p));
  return a;
}
PointSet2D pts_from(const json& j) {
  PointSet2D out;
  for (const auto& p : j) out.push_back(pt_from(p));
  return out;
}
json box(const Box& b) {
  return {{"center", pt(b.center)}, {"length", b.length}, {"width", b.width}, {"heading", b.heading}};
}
Box box_from(const json& j) {
  return {pt_from(j.at("center")), j.at("length").get<double>(), j.at("width").get<double>(),
          j.at("heading").get<double>()};
}
json grid(const OccupancyGrid& g) {
  return {{"rows", g.rows}, {"cols", g.cols}, {"cell_size", g.cell_size}, {"origin", pt(g.origin)},
          {"probs", g.probs}};
}
OccupancyGrid grid_from(const json& j) {
  OccupancyGrid g;
  g.rows = j.at("rows").get<std::size_t>();
  g.cols = j.at("cols").get<std::size_t>();
  g.cell_size = j.at("cell_size").get<double>();
  g.origin = pt_from(j.at("origin"));
  g.probs = j.at("probs").get<std::vector<double>>();
  if (g.probs.size() != g.rows * g.cols) throw DecodeError("grid: probs size does not match rows * cols");
  return g;
}

}  // namespace

json to_json(const EvalPrediction& p) {
  json tracks = json::array();
  for (const auto& d : p.tracks) {
    json t = {{"box", box(d.box)}, {"score", d.score}};
    t["track_id"] = d.track_id ? json(*d.track_id) : json(nullptr);
    tracks.push_back(t);
  }
  json forecasts = json::array();
  const TrajectorySet& tr = p.trajectories;
  for (std::size_t a = 0; a < tr.agents; ++a) {
    json modes = json::array();
    for (std::size_t m = 0; m < tr.modes; ++m) {
      PointSet2D way;
      for (std::size_t t = 0; t < tr.steps; ++t) way.push_back(tr.at(a, m, t));
      modes.push_back({{"score", tr.scores(a, m)}, {"points", pts(way)}});
    }
    forecasts.push_back({{"anchor", pt(p.anchors[a])}, {"modes", modes}});
  }
  return {{"tracks", tracks},       {"lanes", grid(p.lanes)},     {"crossings", grid(p.crossings)},
          {"occupancy", grid(p.occupancy)}, {"forecasts", forecasts}, {"modes", tr.modes},
          {"steps", tr.steps},      {"plan", pts(p.plan)},        {"bps", p.bps}};
}

EvalPrediction prediction_from_json(const json& j) {
  try {
    EvalPrediction p;
    for (const auto& t : j.at("tracks")) {
      Detection d{box_from(t.at("box")), t.at("score").get<double>(), std::nullopt};
      if (t.contains("track_id") && !t.at("track_id").is_null()) d.track_id = t.at("track_id").get<std::int64_t>();
      p.tracks.push_back(d);
    }
    p.lanes = grid_from(j.at("lanes"));
    p.crossings = grid_from(j.at("crossings"));
    p.occupancy = grid_from(j.at("occupancy"));
    const auto& fc = j.at("forecasts");
    TrajectorySet tr(fc.size(), j.at("modes").get<std::size_t>(), j.at("steps").get<std::size_t>());
    for (std::size_t a = 0; a < fc.size(); ++a) {
      p.anchors.push_back(pt_from(fc[a].at("anchor")));
      const auto& modes = fc[a].at("modes");
      if (modes.size() != tr.modes) throw DecodeError("forecast mode count mismatch");
      for (std::size_t m = 0; m < tr.modes; ++m) {
        tr.scores(a, m) = modes[m].at("score").get<double>();
        const PointSet2D way = pts_from(modes[m].at("points"));
        if (way.size() != tr.steps) throw DecodeError("forecast step count mismatch");
        for (std::size_t t = 0; t < tr.steps; ++t) tr.at(a, m, t) = way[t];
      }
    }
    p.trajectories = tr;
    p.plan = pts_from(j.at("plan"));
    p.bps = j.value("bps", 0.0);
    return p;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("prediction file: ") + e.what());
  }
}

json to_json(const EvalTruth& t) {
  json agents = json::array();
  for (const auto& a : t.agents) {
    agents.push_back({{"id", a.id}, {"box", box(a.box)}, {"velocity", pt(a.velocity)}, {"future", pts(a.future)}});
  }
  return {{"agents", agents},
          {"lanes", grid(t.lanes)},
          {"crossings", grid(t.crossings)},
          {"occupancy", grid(t.occupancy)},
          {"expert_plan", pts(t.expert_plan)}};
}

EvalTruth truth_from_json(const json& j) {
  try {
    EvalTruth t;
    for (const auto& a : j.at("agents")) {
      AgentTruth at;
      at.id = a.at("id").get<std::int64_t>();
      at.box = box_from(a.at("box"));
      if (a.contains("velocity")) at.velocity = pt_from(a.at("velocity"));
      at.future = pts_from(a.at("future"));
      t.agents.push_back(at);
    }
    t.lanes = grid_from(j.at("lanes"));
    t.crossings = grid_from(j.at("crossings"));
    t.occupancy = grid_from(j.at("occupancy"));
    t.expert_plan = pts_from(j.at("expert_plan"));
    return t;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("ground-truth file: ") + e.what());
  }
}

}  // namespace v2x
