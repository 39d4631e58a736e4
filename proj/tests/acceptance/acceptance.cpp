// Runs the nine acceptance criteria and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "unit/oracles.hpp"
#include "v2x/comm/channel.hpp"
#include "v2x/harness/experiments.hpp"
#include "v2x/harness/gradient_suite.hpp"
#include "v2x/metrics/assignment.hpp"
#include "v2x/metrics/detection.hpp"
#include "v2x/metrics/forecast.hpp"
#include "v2x/moe/moe_layer.hpp"

using namespace v2x;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Collects failed checks for one criterion.
struct Verdict {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1 -------------------------------------------------------------------------

Verdict gradient_integrity() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto entries = gradient_suite();
  const double seconds = since(t0);
  for (const auto& e : entries) {
    v.note(e.name + ": max rel " + fmt(e.max_relative_error) + " over " + std::to_string(e.coordinates) +
           " coords, " + std::to_string(e.above_tolerance) + " above 1e-5, directional " +
           fmt(e.directional_error));
    v.expect(e.pass, e.name + " max relative error " + fmt(e.max_relative_error) + " >= 1e-5 (worst " +
                         e.worst_parameter + ")");
  }
  v.note("runtime " + fmt(seconds) + " s");
  v.expect(seconds < 120.0, "runtime " + fmt(seconds) + " s");
  return v;
}

// 2 -------------------------------------------------------------------------

Verdict moe_semantics() {
  Verdict v;
  Rng rng(21);
  {
    const MoeLayer one = make_moe(6, 9, 6, 1, 1, 0.03, rng);
    const Matrix x = rng.uniform_matrix(11, 6, 2.0);
    v.expect(moe_forward(one, x).first == perceptron_forward(one.experts[0], x), "E=1 not bitwise feed-forward");
  }
  {
    const MoeLayer dense = make_moe(5, 8, 4, 4, 4, 0.03, rng);
    const Matrix x = rng.uniform_matrix(9, 5, 1.5);
    const Matrix probs = softmax_rows(oracle::naive_matmul(x, dense.gate));
    Matrix want(9, 4);
    for (std::size_t e = 0; e < 4; ++e) {
      const Matrix y = oracle::naive_perceptron(dense.experts[e], x);
      for (std::size_t t = 0; t < 9; ++t)
        for (std::size_t o = 0; o < 4; ++o) want(t, o) += probs(t, e) * y(t, o);
    }
    const double diff = max_abs_diff(moe_forward(dense, x).first, want);
    v.note("k=E vs dense mixture: " + fmt(diff));
    v.expect(diff <= 1e-12, "k=E differs from dense mixture by " + fmt(diff));
  }
  {
    // Two tokens each preferring a different expert: p and l both uniform.
    MoeLayer layer = make_moe(2, 3, 2, 2, 1, 0.03, rng);
    layer.gate = Matrix{{1.0, 0.0}, {0.0, 1.0}};
    const RoutingStats even = route(layer, Matrix{{1.0, 0.0}, {0.0, 1.0}});
    v.expect(balance_loss(even, 0.03) == 0.0, "uniform routing gives nonzero balance loss");
    const RoutingStats skew = route(layer, Matrix{{1.0, 0.0}, {2.0, 0.0}});
    v.expect(balance_loss(skew, 0.03) > 0.0, "skewed routing gives zero balance loss");
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t e = 2 + rng.index(7);
      RoutingStats s;
      for (auto* vec : {&s.probability, &s.load}) {
        vec->resize(e);
        for (auto& x : *vec) x = rng.uniform(0, 1);
        const double total = std::accumulate(vec->begin(), vec->end(), 0.0);
        for (auto& x : *vec) x /= total;
      }
      const double unit = balance_loss(s, 1.0);
      v.expect(unit > 0.0, "non-uniform stats give zero loss");
      v.expect(std::abs(balance_loss(s, 0.03) - 0.03 * unit) <= 1e-12, "lambda scaling not linear");
      RoutingStats u = s;
      std::fill(u.probability.begin(), u.probability.end(), 1.0 / static_cast<double>(e));
      std::fill(u.load.begin(), u.load.end(), 1.0 / static_cast<double>(e));
      v.expect(balance_loss(u, 0.03) <= 1e-30, "uniform stats give nonzero loss");
    }
  }
  return v;
}

// 3 -------------------------------------------------------------------------

PipelineOutputs without_sent(PipelineOutputs o) {
  o.sent.clear();
  return o;
}

Verdict fusion_noop() {
  Verdict v;
  const SmokeSetup s = smoke_setup();
  for (std::uint64_t seed : {3u, 8u, 13u}) {
    const Scenario scn = gen_scenario(seed, 2, s.scenario.config);
    const CooperativeParams params = make_params(s.config, scn.config);
    RunConfig off = s.config;
    off.perception_fusion = off.prediction_fusion = false;
    const RunResult base = run_pipeline(scn, off, params);
    v.expect(base.outputs.sent.empty(), "baseline constructed messages");
    for (auto [p, m] : {std::pair{true, true}, {true, false}, {false, true}}) {
      RunConfig zero = s.config;
      zero.perception_fusion = p;
      zero.prediction_fusion = m;
      zero.budget.bytes_per_second = 0.0;
      const RunResult r = run_pipeline(scn, zero, params);
      v.expect(r.outputs.delivered.empty(), "zero budget delivered a message");
      v.expect(without_sent(r.outputs) == base.outputs, "zero-budget outputs differ from baseline");
      v.expect(r.loss == base.loss, "zero-budget loss differs from baseline");
      v.expect(to_json(r.report).dump() == to_json(base.report).dump(), "zero-budget report differs");
    }
    // Operator level: empty other-agent input leaves ego values untouched.
    ad::Tape tape;
    const auto& ego = params.ego;
    ad::Var ctx = sensor_context(tape, ego, sensor_features(scn, Party::ego, s.config.model.position_scale));
    EncoderTrace enc = run_encoder(tape, ego.encoder, initial_bev(tape, ego), ctx);
    HeadsTrace h = perception_heads(tape, ego, enc.tokens);
    const std::size_t d = s.config.model.model_dim;
    QueryVars t = track_fusion(tape, params.fusion, scn.infra_to_ego(), h.track,
                               constant_queries(tape, empty_queries(QueryKind::track, d, 1)));
    const RunResult& ref = base;
    v.expect(snapshot(t) == ref.outputs.tracks, "track_fusion with empty other differs from baseline");
    MotionTrace mot = motion_decoder(tape, ego, t, enc.tokens);
    QueryVars tf = traj_fusion(tape, params.fusion, scn.infra_to_ego(), mot.motion,
                               constant_queries(tape, empty_queries(QueryKind::motion, d, 1)), t);
    v.expect(snapshot(tf).queries == ref.outputs.motion.queries, "traj_fusion with empty other differs from baseline");
    const OccupancyGrid occ = occupancy_from_logits(ego, h.occ_logits.value());
    v.expect(occ_fusion(occ, OccupancyGrid{}, scn.infra_to_ego()) == ref.outputs.occupancy,
             "occ_fusion with empty other differs from baseline");
  }
  return v;
}

// 4 -------------------------------------------------------------------------

Verdict occ_algebra() {
  Verdict v;
  Rng rng(44);
  auto random_grid = [&] {
    OccupancyGrid g = OccupancyGrid::centered(6, 6, 1.0);
    for (double& p : g.probs) p = rng.bernoulli(0.2) ? 0.0 : (rng.bernoulli(0.1) ? 0.1 : rng.uniform(0, 1));
    return g;
  };
  const auto fuse = [](const OccupancyGrid& a, const OccupancyGrid& b) { return occ_fusion(a, b, {}); };
  for (int trial = 0; trial < 1000; ++trial) {
    const OccupancyGrid a = random_grid(), b = random_grid(), c = random_grid();
    const FusedOccupancy ab = fuse(a, b);
    v.expect(ab == fuse(b, a), "not commutative");
    v.expect(fuse(ab.probability, c).probability == fuse(a, fuse(b, c).probability).probability,
             "not associative");
    v.expect(fuse(a, a).probability == a, "not idempotent");
    OccupancyGrid a2 = a;
    for (double& p : a2.probs) p = std::min(1.0, p + rng.uniform(0, 0.3));
    const FusedOccupancy hi = fuse(a2, b);
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
      const double mx = std::max(a.probs[i], b.probs[i]);
      v.expect(ab.probability.probs[i] == mx, "fused probability is not the exact max");
      v.expect(ab.binary.probs[i] == (mx > 0.1 ? 1.0 : 0.0), "threshold rule violated");
      v.expect(hi.probability.probs[i] >= ab.probability.probs[i], "not monotone");
      v.expect(hi.binary.probs[i] >= ab.binary.probs[i], "binary not monotone");
    }
    if (!v.failures.empty()) break;
  }
  return v;
}

// 5 -------------------------------------------------------------------------

double brute_min_cost(const Matrix& c) {
  std::vector<std::size_t> perm(c.cols());
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i) s += c(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Detection det(double x, double y, double score = 1.0, std::optional<std::int64_t> id = {}) {
  return {{{x, y}, 4, 2, 0}, score, id};
}

Verdict metric_oracles() {
  Verdict v;
  Rng rng(55);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 30; ++trial) {
      Matrix c(n, n);
      for (auto& x : c.data()) x = static_cast<double>(rng.index(25));
      v.expect(hungarian(c).total_cost == brute_min_cost(c), "hungarian differs from enumeration, n=" + std::to_string(n));
    }
  }
  // AP = 0.5: one of two GT matched, no false positive.
  v.expect(map_score({det(0, 0)}, {det(0, 0), det(10, 0)}, {0.5}) == 0.5, "AP worked value 0.5");
  // Micro scene: p1 exact on A; p2 1 m off B (IoU 0.6); p3 far; p4 2 m off A (IoU 1/3) but A taken.
  {
    const std::vector<Detection> gts{det(0, 0), det(10, 0), det(20, 0)};
    const std::vector<Detection> preds{det(2, 0, 0.6), det(0, 0, 0.9), det(11, 0, 0.8), det(50, 50, 0.7)};
    const double want = (6 * 0.4 + 4 * (1.0 / 6.0)) / 10.0;
    v.expect(std::abs(map_score(preds, gts, default_iou_thresholds()) - want) <= 1e-12, "mAP micro scene");
  }
  // MOTA_1 = 0.9: ten GT over two frames, one identity switch.
  {
    std::vector<TrackedFrame> frames(2);
    for (std::size_t f = 0; f < 2; ++f)
      for (int k = 0; k < 5; ++k) {
        frames[f].gts.push_back(det(10.0 * k, 0, 1.0, k));
        frames[f].preds.push_back(det(10.0 * k, 0, 1.0, (f == 1 && k == 2) ? 99 : k));
      }
    const MotaCounts c = mota_counts(frames, 0.0, 2.0);
    v.expect(c.gt == 10 && c.idsw == 1 && c.fp == 0 && c.fn == 0, "MOTA counts");
    v.expect(std::abs(mota_at_recall(c, 1.0) - 0.9) <= 1e-12, "MOTA_1 = 0.9");
    // AMOTA with every prediction at score 1: recall 1 at every point, MOTA_r = 1 - 0.1 / r capped.
    double want = 0.0;
    for (int k = 1; k <= 40; ++k) {
      const double r = k / 40.0;
      want += std::clamp(1.0 - (1.0 - (1.0 - r) * 10.0) / (r * 10.0), 0.0, 1.0);
    }
    v.expect(std::abs(amota(frames) - want / 40.0) <= 1e-12, "AMOTA micro scene");
  }
  // motion_errors against enumeration.
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t agents = 1 + rng.index(3), modes = 1 + rng.index(6), steps = 1 + rng.index(12);
    TrajectorySet p(agents, modes, steps);
    std::vector<PointSet2D> gt(agents, PointSet2D(steps));
    for (auto& q : p.points) q = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (auto& a : gt)
      for (auto& q : a) q = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    double ade = 0, fde = 0, mr = 0;
    for (std::size_t a = 0; a < agents; ++a) {
      double best_ade = kInf, best_fde = kInf;
      for (std::size_t m = 0; m < modes; ++m) {
        double s = 0;
        for (std::size_t t = 0; t < steps; ++t) s += std::hypot(p.at(a, m, t).x - gt[a][t].x, p.at(a, m, t).y - gt[a][t].y);
        best_ade = std::min(best_ade, s / steps);
        best_fde = std::min(best_fde, std::hypot(p.at(a, m, steps - 1).x - gt[a].back().x,
                                                 p.at(a, m, steps - 1).y - gt[a].back().y));
      }
      ade += best_ade;
      fde += best_fde;
      mr += best_fde > 2.0;
    }
    const MotionErrors e = motion_errors(p, gt, 2.0);
    v.expect(std::abs(e.min_ade - ade / agents) <= 1e-12 && std::abs(e.min_fde - fde / agents) <= 1e-12 &&
                 std::abs(e.miss_rate - mr / agents) <= 1e-12,
             "motion_errors differs from enumeration");
  }
  // grid_iou against a direct count.
  for (int trial = 0; trial < 100; ++trial) {
    OccupancyGrid a = OccupancyGrid::centered(8, 8, 1.5), b = a;
    for (auto& x : a.probs) x = rng.bernoulli(0.3) ? 1.0 : 0.0;
    for (auto& x : b.probs) x = rng.bernoulli(0.3) ? 1.0 : 0.0;
    const double range = rng.uniform(2, 14);
    double inter = 0, uni = 0;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) {
        const Point2 c = a.cell_center(i, j);
        if (std::abs(c.x) > range / 2 || std::abs(c.y) > range / 2) continue;
        const bool pa = a.at(i, j) > 0.5, pb = b.at(i, j) > 0.5;
        inter += pa && pb;
        uni += pa || pb;
      }
    const double want = uni == 0 ? 1.0 : inter / uni;
    v.expect(std::abs(grid_iou(a, b, range) - want) <= 1e-12, "grid_iou differs from direct count");
  }
  // planning_errors against per-step enumeration.
  for (int trial = 0; trial < 100; ++trial) {
    PointSet2D plan(6), expert(6);
    for (auto& q : plan) q = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
    for (auto& q : expert) q = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
    std::vector<std::vector<Box>> obs(6);
    for (auto& o : obs)
      if (rng.bernoulli(0.3)) o.push_back(Box{{rng.uniform(-10, 10), rng.uniform(-10, 10)}, 4, 2, rng.uniform(-3, 3)});
    const PlanningErrors e = planning_errors(plan, expert, obs);
    double cum = 0;
    bool hit = false;
    Point2 prev{0, 0};
    for (std::size_t t = 0; t < 6; ++t) {
      cum += std::hypot(plan[t].x - expert[t].x, plan[t].y - expert[t].y);
      const double heading = std::atan2(plan[t].y - prev.y, plan[t].x - prev.x);
      prev = plan[t];
      for (const auto& b : obs[t]) hit = hit || intersection_area(Box{plan[t], 4.0, 1.8, heading}, b) > 0;
      if (t % 2 == 1) {
        v.expect(std::abs(e.l2[t / 2] - cum / (t + 1)) <= 1e-12, "planning L2 differs from enumeration");
        v.expect(e.collision[t / 2] == (hit ? 1.0 : 0.0), "planning collision differs from enumeration");
      }
    }
  }
  return v;
}

// 6 -------------------------------------------------------------------------

QuerySet random_set(QueryKind kind, std::size_t n, std::size_t d, Rng& rng) {
  QuerySet q;
  q.kind = kind;
  q.agent = 1;
  q.queries = rng.uniform_matrix(n, d, 3.0);
  for (std::size_t i = 0; i < n; ++i) {
    q.refs.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50)});
    q.scores.push_back(rng.uniform(0, 1));
  }
  return q;
}

double f32_ulp(double x) {
  const float f = std::abs(static_cast<float>(x));
  return std::nextafter(f, std::numeric_limits<float>::infinity()) - f;
}

Verdict wire_exactness() {
  Verdict v;
  Rng rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    const QuerySet q = random_set(QueryKind::motion, 1 + rng.index(20), 1 + rng.index(32), rng);
    const QuerySet back = decode_queries(from_wire(to_wire(encode(q, 1, 0))));
    for (std::size_t i = 0; i < q.queries.size(); ++i)
      v.expect(std::abs(back.queries[i] - q.queries[i]) <= f32_ulp(q.queries[i]), "query round trip beyond f32 ulp");
    for (std::size_t i = 0; i < q.count(); ++i) {
      v.expect(std::abs(back.refs[i].x - q.refs[i].x) <= f32_ulp(q.refs[i].x), "ref round trip");
      v.expect(std::abs(back.scores[i] - q.scores[i]) <= f32_ulp(q.scores[i]), "score round trip");
    }
    OccupancyGrid g = OccupancyGrid::centered(1 + rng.index(10), 1 + rng.index(10), 0.8);
    g = OccupancyGrid::centered(g.rows, g.rows, 0.8);
    for (double& p : g.probs) p = rng.uniform(0, 1);
    const OccupancyGrid gb = decode_grid(from_wire(to_wire(encode(g, 1, 0))));
    for (std::size_t i = 0; i < g.probs.size(); ++i)
      v.expect(std::abs(gb.probs[i] - g.probs[i]) <= f32_ulp(g.probs[i]), "grid round trip");
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<V2XMessage> frame;
    const std::size_t n = 1 + rng.index(4);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(0.25)) {
        OccupancyGrid g = OccupancyGrid::centered(1 + rng.index(6), 1 + rng.index(6), 0.8);
        g = OccupancyGrid::centered(g.rows, g.rows, 0.8);
        for (double& p : g.probs) p = rng.uniform(0, 1);
        frame.push_back(encode(g, 1, 0));
      } else {
        frame.push_back(encode(random_set(QueryKind::track, rng.index(12), 1 + rng.index(8), rng), 1, 0));
      }
    }
    double sum = 0;
    for (const auto& m : frame) sum += bps({m}, 2.0);
    const double full = bps(frame, 2.0);
    v.expect(full == sum, "bps not additive");
    for (double frac : {0.0, 0.1, 0.37, 0.5, 0.8, 1.0}) {
      const double cap = std::floor(frac * full) + rng.uniform(0, 3);
      v.expect(bps(constrain(frame, {cap, 2.0}), 2.0) <= cap, "constrain exceeded its budget");
    }
    const V2XMessage motion = encode(random_set(QueryKind::motion, 1 + rng.index(30), 1 + rng.index(8), rng), 1, 0);
    std::vector<V2XMessage> with = frame;
    with.push_back(motion);
    v.expect(bps(with, 2.0) > full, "motion message did not increase bps");
  }
  // Pipeline level: prediction-level fusion adds the motion message to BPS.
  const SmokeSetup s = smoke_setup();
  const CooperativeParams params = make_params(s.config, s.scenario.config);
  RunConfig p = s.config;
  p.prediction_fusion = false;
  const double perception = run_pipeline(s.scenario, p, params).report.bps;
  const double both = run_pipeline(s.scenario, s.config, params).report.bps;
  v.note("pipeline BPS perception " + fmt(perception) + " -> perception+motion " + fmt(both));
  v.expect(both > perception, "pipeline BPS did not rise with motion messages");
  return v;
}

// 7 -------------------------------------------------------------------------

Verdict training_smoke() {
  Verdict v;
  const SmokeSetup s = smoke_setup();
  const auto t0 = Clock::now();
  const TrainResult r = train_smoke(s.scenario, s.config, 200, kSmokeLearningRate);
  const double seconds = since(t0);
  const double first = r.history.front().total;
  const double last = r.final_loss.total;
  const double floor = 1.0 / (4.0 * static_cast<double>(s.config.model.experts));
  double min_load = 1.0;
  for (const auto& layer : r.routing)
    for (double l : layer.load) min_load = std::min(min_load, l);
  v.note("loss " + fmt(first) + " -> " + fmt(last) + " (" + fmt(100.0 * (1.0 - last / first)) + "% drop), min load " +
         fmt(min_load) + ", " + fmt(seconds) + " s");
  v.expect(last <= 0.5 * first, "loss dropped only " + fmt(100.0 * (1.0 - last / first)) + "%");
  v.expect(min_load >= floor, "an expert load fell to " + fmt(min_load));
  v.expect(seconds < 60.0, "runtime " + fmt(seconds) + " s");
  return v;
}

// 8 -------------------------------------------------------------------------

std::vector<Scenario> batch(const ScenarioConfig& c, std::size_t n) {
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(gen_scenario(200 + i, 2, c));
  return out;
}

Verdict ablation_structure() {
  Verdict v;
  const SmokeSetup s = smoke_setup();
  const auto scenarios = batch(s.scenario.config, 3);
  const auto grid = toggle_grid(s.config);
  const auto a = ablate(grid, scenarios);
  const auto b = ablate(grid, scenarios);
  v.expect(a.size() == 16, "table has " + std::to_string(a.size()) + " rows");
  const std::vector<std::string> want{"mAP", "AMOTA", "minADE", "L2_1s", "L2_2s", "L2_3s", "L2_avg", "collision_avg"};
  v.expect(ablation_columns() == want, "column set differs");
  std::ostringstream ca, cb;
  write_csv(ca, a);
  write_csv(cb, b);
  v.expect(ca.str() == cb.str(), "repeated ablation differs");
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      v.expect(!(a[i].p_level == a[j].p_level && a[i].m_level == a[j].m_level &&
                 a[i].moe_encoder == a[j].moe_encoder && a[i].moe_decoder == a[j].moe_decoder),
               "duplicate row");
  bool rejected = false;
  try {
    ablate({s.config, s.config}, scenarios);
  } catch (const ContractError&) {
    rejected = true;
  }
  v.expect(rejected, "duplicate configs accepted");
  return v;
}

// 9 -------------------------------------------------------------------------

Verdict bandwidth_sweep_structure() {
  Verdict v;
  const SmokeSetup s = smoke_setup();
  const auto scenarios = batch(s.scenario.config, 3);
  const std::vector<double> budgets{0.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, kInf};
  const auto curve = bandwidth_sweep(budgets, s.config, scenarios);
  v.expect(curve.size() >= 5, "fewer than five points");
  std::string realized;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    realized += (i ? " " : "") + fmt(curve[i].report.bps);
    v.expect(curve[i].report.bps <= budgets[i], "realized BPS above budget");
    if (i > 0) v.expect(curve[i].report.bps >= curve[i - 1].report.bps, "BPS not monotone");
  }
  v.note("realized BPS: " + realized);
  RunConfig off = s.config;
  off.perception_fusion = off.prediction_fusion = false;
  const MetricsReport base = evaluate_batch(scenarios, off, make_params(off, scenarios.front().config));
  v.expect(to_json(curve.front().report).dump() == to_json(base).dump(), "zero-budget point differs from baseline");
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 gradient integrity", gradient_integrity},
      {"2 MoE semantics", moe_semantics},
      {"3 fusion no-op", fusion_noop},
      {"4 OccFusion algebra", occ_algebra},
      {"5 metric oracles", metric_oracles},
      {"6 wire exactness", wire_exactness},
      {"7 training smoke", training_smoke},
      {"8 ablation structure", ablation_structure},
      {"9 bandwidth sweep", bandwidth_sweep_structure},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool pass = v.failures.empty();
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.name << std::endl;
    for (const auto& n : v.notes) std::cout << "      " << n << '\n';
    const std::size_t shown = std::min<std::size_t>(v.failures.size(), 8);
    for (std::size_t i = 0; i < shown; ++i) std::cout << "      ! " << v.failures[i] << '\n';
    if (v.failures.size() > shown) std::cout << "      ! ... " << v.failures.size() - shown << " more\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
