#include "v2x/model/loss.hpp"

#include <limits>
#include <numeric>

#include "v2x/metrics/assignment.hpp"

namespace v2x {

MapClass map_class_of(std::size_t query_index) {
  return query_index % 2 == 0 ? MapClass::lane : MapClass::crossing;
}

LossBreakdown LossTrace::values() const {
  return {track.value()(0, 0), map.value()(0, 0), occ.value()(0, 0), mot.value()(0, 0),
          plan.value()(0, 0),  moe.value()(0, 0), total.value()(0, 0)};
}

namespace {

double sq(double v) { return v * v; }

// Mean over matched pairs of squared reference error (scaled), plus BCE of the
// logits against "row was matched".
ad::Var set_loss(ad::Tape& tape, const ad::Var& refs, const std::vector<std::size_t>& rows,
                 const PointSet2D& targets, const ad::Var& logits,
                 const std::vector<std::size_t>& logit_rows, double scale) {
  ad::Var loss = tape.constant(Matrix(1, 1));
  Matrix cost(rows.size(), targets.size());
  const Matrix& rv = refs.value();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < targets.size(); ++j)
      cost(i, j) = sq(rv(rows[i], 0) - targets[j].x) + sq(rv(rows[i], 1) - targets[j].y);
  const Assignment a = hungarian(cost);
  std::vector<char> matched(rows.size(), 0);
  if (!a.pairs.empty()) {
    std::vector<std::size_t> picked;
    Matrix goal(a.pairs.size(), 2);
    for (std::size_t k = 0; k < a.pairs.size(); ++k) {
      const auto [i, j] = a.pairs[k];
      matched[i] = 1;
      picked.push_back(rows[i]);
      goal(k, 0) = targets[j].x;
      goal(k, 1) = targets[j].y;
    }
    ad::Var diff = ad::scale(ad::sub(ad::gather_rows(refs, picked), tape.constant(goal)), 1.0 / scale);
    loss = ad::scale(ad::sum(ad::mul(diff, diff)), 1.0 / static_cast<double>(a.pairs.size()));
  }
  if (!logit_rows.empty()) {
    // logit_rows[k] indexes into rows; the logit is row k of logits.
    Matrix target(logit_rows.size(), 1);
    for (std::size_t k = 0; k < logit_rows.size(); ++k) target(k, 0) = matched[logit_rows[k]];
    loss = ad::add(loss, ad::bce_with_logits(logits, target));
  }
  return loss;
}

}  // namespace

LossTrace joint_loss(ad::Tape& tape, const PredictionVars& p, const GroundTruth& gt,
                     const LossConfig& config) {
  const double s = config.position_scale;
  if (p.ego_track_rows > p.track.count() || p.ego_track_logits.rows() != p.ego_track_rows) {
    throw ContractError("joint_loss: ego track logits do not match the fused track rows");
  }
  if (p.ego_map_logits.rows() != p.map.count()) {
    throw ContractError("joint_loss: map logits do not match the map rows");
  }
  if (p.occ_logits.rows() != gt.occupancy.probs.size()) {
    throw ContractError("joint_loss: occupancy logits for " + std::to_string(p.occ_logits.rows()) +
                        " cells, ground truth has " + std::to_string(gt.occupancy.probs.size()));
  }
  if (p.plan.rows() != gt.expert_plan.size()) {
    throw ContractError("joint_loss: plan length differs from expert plan");
  }
  const std::size_t agents = p.motion_anchors.rows();
  const std::size_t steps = p.motion_positions.cols() / 2;
  if (p.motion_positions.rows() != agents * p.modes) {
    throw ContractError("joint_loss: motion positions do not match anchors x modes");
  }
  for (const auto& a : gt.agents) {
    if (agents > 0 && a.future.size() != steps) {
      throw ContractError("joint_loss: ground-truth future length differs from forecast horizon");
    }
  }

  LossTrace t;
  PointSet2D centers;
  for (const auto& a : gt.agents) centers.push_back(a.box.center);
  {
    std::vector<std::size_t> rows(p.track.count()), logit_rows(p.ego_track_rows);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(logit_rows.begin(), logit_rows.end(), 0);
    t.track = set_loss(tape, p.track.refs, rows, centers, p.ego_track_logits, logit_rows, s);
  }
  t.map = tape.constant(Matrix(1, 1));
  for (MapClass cls : {MapClass::lane, MapClass::crossing}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < p.map.count(); ++i)
      if (map_class_of(i) == cls) rows.push_back(i);
    if (rows.empty()) continue;
    PointSet2D targets;
    for (const auto& m : gt.map)
      if (m.cls == cls) targets.push_back(m.position);
    std::vector<std::size_t> logit_rows(rows.size());
    std::iota(logit_rows.begin(), logit_rows.end(), 0);
    t.map = ad::add(t.map, set_loss(tape, p.map.refs, rows, targets,
                                    ad::gather_rows(p.ego_map_logits, rows), logit_rows, s));
  }
  {
    Matrix target(gt.occupancy.probs.size(), 1);
    for (std::size_t i = 0; i < target.rows(); ++i) target(i, 0) = gt.occupancy.probs[i];
    t.occ = ad::bce_with_logits(p.occ_logits, target);
  }
  t.mot = tape.constant(Matrix(1, 1));
  if (agents > 0 && !gt.agents.empty()) {
    Matrix cost(agents, centers.size());
    for (std::size_t a = 0; a < agents; ++a)
      for (std::size_t j = 0; j < centers.size(); ++j)
        cost(a, j) = sq(p.motion_anchors(a, 0) - centers[j].x) +
                     sq(p.motion_anchors(a, 1) - centers[j].y);
    const Assignment match = hungarian(cost);
    const Matrix& pos = p.motion_positions.value();
    std::vector<std::size_t> best_rows;
    Matrix goal(match.pairs.size(), 2 * steps);
    for (std::size_t k = 0; k < match.pairs.size(); ++k) {
      const auto [a, j] = match.pairs[k];
      const PointSet2D& fut = gt.agents[j].future;
      std::size_t best = 0;
      double best_err = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < p.modes; ++m) {
        double e = 0.0;
        const std::size_t r = a * p.modes + m;
        for (std::size_t st = 0; st < steps; ++st)
          e += sq(pos(r, 2 * st) - fut[st].x) + sq(pos(r, 2 * st + 1) - fut[st].y);
        if (e < best_err) {
          best_err = e;
          best = m;
        }
      }
      best_rows.push_back(a * p.modes + best);
      for (std::size_t st = 0; st < steps; ++st) {
        goal(k, 2 * st) = fut[st].x;
        goal(k, 2 * st + 1) = fut[st].y;
      }
    }
    ad::Var diff = ad::scale(
        ad::sub(ad::gather_rows(p.motion_positions, best_rows), tape.constant(goal)), 1.0 / s);
    t.mot = ad::scale(ad::sum(ad::mul(diff, diff)),
                      1.0 / static_cast<double>(match.pairs.size() * steps));
  }
  {
    ad::Var diff = ad::scale(ad::sub(p.plan, tape.constant(to_matrix(gt.expert_plan))), 1.0 / s);
    t.plan = ad::scale(ad::sum(ad::mul(diff, diff)), 1.0 / static_cast<double>(gt.expert_plan.size()));
  }
  t.moe = p.moe;
  t.total = ad::add(ad::add(ad::add(ad::add(ad::add(t.track, t.map), t.occ), t.mot), t.plan), t.moe);
  return t;
}

LossBreakdown joint_loss(const Predictions& p, const GroundTruth& gt, const LossConfig& config) {
  ad::Tape tape;
  PredictionVars v;
  v.track = constant_queries(tape, p.track);
  v.ego_track_rows = p.ego_track_logits.size();
  v.ego_track_logits = tape.constant(Matrix(p.ego_track_logits.size(), 1, p.ego_track_logits));
  v.map = constant_queries(tape, p.map);
  v.ego_map_logits = tape.constant(Matrix(p.ego_map_logits.size(), 1, p.ego_map_logits));
  v.occ_logits = tape.constant(Matrix(p.occ_logits.size(), 1, p.occ_logits));
  const TrajectorySet& m = p.motion;
  if (m.agents != p.motion_anchors.size()) {
    throw ContractError("joint_loss: one anchor per forecast agent required");
  }
  Matrix pos(m.agents * m.modes, 2 * m.steps);
  for (std::size_t a = 0; a < m.agents; ++a)
    for (std::size_t k = 0; k < m.modes; ++k)
      for (std::size_t st = 0; st < m.steps; ++st) {
        pos(a * m.modes + k, 2 * st) = m.at(a, k, st).x;
        pos(a * m.modes + k, 2 * st + 1) = m.at(a, k, st).y;
      }
  v.motion_positions = tape.constant(std::move(pos));
  v.motion_anchors = p.motion_anchors.empty() ? Matrix(0, 2) : to_matrix(p.motion_anchors);
  v.modes = m.modes;
  v.plan = tape.constant(p.plan.empty() ? Matrix(0, 2) : to_matrix(p.plan));
  v.moe = tape.constant(Matrix(1, 1, p.moe));
  return joint_loss(tape, v, gt, config).values();
}

}  // namespace v2x
