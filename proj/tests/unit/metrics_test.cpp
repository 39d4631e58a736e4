#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>

#include "v2x/metrics/assignment.hpp"
#include "v2x/metrics/detection.hpp"
#include "v2x/metrics/forecast.hpp"
#include "v2x/metrics/report.hpp"
#include "v2x/numerics/random.hpp"

namespace v2x {
namespace {

double brute_force_min_cost(const Matrix& c) {
  std::vector<std::size_t> perm(c.cols());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i) s += c(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(Hungarian, WorkedExamples) {
  const Assignment one = hungarian(Matrix{{5}});
  EXPECT_EQ(one.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_EQ(one.total_cost, 5.0);
  const Assignment two = hungarian(Matrix{{1, 2}, {2, 1}});
  EXPECT_EQ(two.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}}));
  EXPECT_EQ(two.total_cost, 2.0);
}

TEST(Hungarian, MatchesPermutationEnumeration) {
  Rng rng(1);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 40; ++trial) {
      Matrix c(n, n);
      for (auto& v : c.data()) v = static_cast<double>(rng.index(20));
      const Assignment a = hungarian(c);
      EXPECT_EQ(a.pairs.size(), n);
      EXPECT_EQ(a.total_cost, brute_force_min_cost(c));
      std::vector<char> rows(n, 0), cols(n, 0);
      for (const auto& [r, k] : a.pairs) {
        EXPECT_FALSE(rows[r]);
        EXPECT_FALSE(cols[k]);
        rows[r] = cols[k] = 1;
      }
    }
  }
}

TEST(Hungarian, RectangularMatchesEnumerationOfInjections) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix tall(5, 3);
    for (auto& v : tall.data()) v = static_cast<double>(rng.index(30));
    // Enumerate injections of the 3 columns into the 5 rows.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < 5; ++a)
      for (std::size_t b = 0; b < 5; ++b)
        for (std::size_t c = 0; c < 5; ++c)
          if (a != b && b != c && a != c) best = std::min(best, tall(a, 0) + tall(b, 1) + tall(c, 2));
    const Assignment h = hungarian(tall);
    EXPECT_EQ(h.pairs.size(), 3u);
    EXPECT_EQ(h.unmatched_rows.size(), 2u);
    EXPECT_EQ(h.total_cost, best);
    EXPECT_EQ(hungarian(transpose(tall)).total_cost, best);
  }
}

TEST(Hungarian, GateReportsExpensivePairsUnmatched) {
  const Assignment a = hungarian(Matrix{{1, 50}, {50, 60}}, 10.0);
  EXPECT_EQ(a.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_EQ(a.unmatched_rows, std::vector<std::size_t>{1});
  EXPECT_EQ(a.unmatched_cols, std::vector<std::size_t>{1});
  EXPECT_EQ(a.total_cost, 1.0);
  const Assignment empty = hungarian(Matrix(0, 3));
  EXPECT_EQ(empty.unmatched_cols.size(), 3u);
  EXPECT_THROW(hungarian(Matrix{{std::nan("")}}), ContractError);
}

TEST(Box, IouWorkedValues) {
  const Box a{{0, 0}, 2, 2, 0};
  EXPECT_EQ(box_iou(a, a), 1.0);
  EXPECT_NEAR(box_iou(a, Box{{1, 0}, 2, 2, 0}), 2.0 / 6.0, 1e-12);
  EXPECT_EQ(box_iou(a, Box{{5, 0}, 2, 2, 0}), 0.0);
  // Unit square against itself turned by 45 degrees: regular octagon of area 2(sqrt2 - 1).
  const double octagon = 2.0 * (std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(box_iou(Box{{0, 0}, 1, 1, 0}, Box{{0, 0}, 1, 1, std::numbers::pi / 4}),
              octagon / (2.0 - octagon), 1e-12);
}

TEST(Box, SeparatingAxisAgreesWithClippedArea) {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const Box a{{rng.uniform(-4, 4), rng.uniform(-4, 4)}, rng.uniform(0.5, 5), rng.uniform(0.5, 3),
                rng.uniform(-3.2, 3.2)};
    const Box b{{rng.uniform(-4, 4), rng.uniform(-4, 4)}, rng.uniform(0.5, 5), rng.uniform(0.5, 3),
                rng.uniform(-3.2, 3.2)};
    const double area = intersection_area(a, b);
    if (area > 1e-9 || area == 0.0) {
      EXPECT_EQ(boxes_overlap(a, b), area > 0.0);
    }
    EXPECT_NEAR(area, intersection_area(b, a), 1e-9);
  }
}

Detection det(double x, double y, double score = 1.0) { return {{{x, y}, 4, 2, 0}, score, {}}; }

TEST(MapScore, WorkedValues) {
  const std::vector<Detection> gts{det(0, 0), det(10, 0), det(-10, 5)};
  const auto r = default_iou_thresholds();
  EXPECT_EQ(map_score(gts, gts, r), 1.0);
  EXPECT_EQ(map_score({}, gts, r), 0.0);
  EXPECT_EQ(map_score({}, {}, r), 1.0);
  EXPECT_EQ(map_score(gts, {}, r), 0.0);
  EXPECT_EQ(map_score({det(0, 0)}, {det(0, 0), det(10, 0)}, {0.5}), 0.5);
  EXPECT_THROW(map_score(gts, gts, {}), std::invalid_argument);
}

TEST(MapScore, HandEnumeratedMicroScene) {
  const std::vector<Detection> gts{det(0, 0), det(10, 0), det(20, 0)};
  // p1 exact on A; p2 shifted 1 m off B (IoU 6/10); p3 far away; p4 shifted 2 m off A
  // (IoU 4/12) but A is taken by the higher-scored p1.
  const std::vector<Detection> preds{det(2, 0, 0.6), det(0, 0, 0.9), det(11, 0, 0.8),
                                     det(50, 50, 0.7)};
  // r <= 0.6: TP 2, FP 2, FN 1 -> 2/5. r >= 0.7: TP 1, FP 3, FN 2 -> 1/6.
  EXPECT_NEAR(map_score(preds, gts, default_iou_thresholds()), (6 * 0.4 + 4.0 / 6.0) / 10.0, 1e-12);
  // Center distance at 1.5 m: p1 and p2 match.
  EXPECT_NEAR(map_score(preds, gts, {1.5}, MatchCriterion::center_distance), 0.4, 1e-12);
}

Detection tracked(double x, double y, std::int64_t id, double score = 1.0) {
  Detection d = det(x, y, score);
  d.track_id = id;
  return d;
}

TEST(Amota, PerfectTrackingIsOne) {
  std::vector<TrackedFrame> frames(3);
  for (std::size_t f = 0; f < 3; ++f) {
    for (int k = 0; k < 4; ++k) {
      frames[f].gts.push_back(tracked(10.0 * k + f, 0, k));
      frames[f].preds.push_back(tracked(10.0 * k + f, 0, 100 + k, 0.5 + 0.1 * k));
    }
  }
  EXPECT_EQ(amota(frames), 1.0);
}

TEST(Amota, SingleIdentitySwitchAtFullRecall) {
  std::vector<TrackedFrame> frames(2);
  for (std::size_t f = 0; f < 2; ++f) {
    for (int k = 0; k < 5; ++k) {
      frames[f].gts.push_back(tracked(10.0 * k, 0, k));
      frames[f].preds.push_back(tracked(10.0 * k, 0, (f == 1 && k == 2) ? 99 : k));
    }
  }
  const MotaCounts c = mota_counts(frames, 0.0, 2.0);
  EXPECT_EQ(c.gt, 10u);
  EXPECT_EQ(c.idsw, 1u);
  EXPECT_EQ(c.fn + c.fp, 0u);
  EXPECT_NEAR(mota_at_recall(c, 1.0), 0.9, 1e-15);
}

TEST(Amota, AllWrongIsZeroAndNoGroundTruthIsNan) {
  std::vector<TrackedFrame> frames(1);
  frames[0].gts = {tracked(0, 0, 1), tracked(10, 0, 2)};
  frames[0].preds = {tracked(40, 40, 1), tracked(60, 60, 2)};
  EXPECT_EQ(amota(frames), 0.0);
  std::vector<TrackedFrame> none(1);
  none[0].preds = {tracked(0, 0, 1)};
  EXPECT_TRUE(std::isnan(amota(none)));
}

// Independent AMOTA: every threshold enumerated; per-frame association by
// exhaustive search (most gated matches, then least total distance).
double amota_oracle(const std::vector<TrackedFrame>& frames, std::size_t points, double gate) {
  std::vector<double> scores;
  std::size_t gt = 0;
  for (const auto& f : frames) {
    gt += f.gts.size();
    for (const auto& p : f.preds) scores.push_back(p.score);
  }
  std::sort(scores.begin(), scores.end(), std::greater<>());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  struct Counts {
    double tp = 0, fp = 0, fn = 0, idsw = 0;
  };
  const auto count = [&](double s) {
    Counts c;
    std::map<std::int64_t, std::int64_t> last;
    for (const auto& f : frames) {
      std::vector<const Detection*> kept;
      for (const auto& p : f.preds)
        if (p.score >= s) kept.push_back(&p);
      const std::size_t g = f.gts.size();
      // assignment[i] = gt index or g for unmatched; enumerate all.
      std::vector<std::size_t> cur(kept.size(), 0), best;
      std::size_t best_n = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      std::function<void(std::size_t, std::vector<char>&)> rec = [&](std::size_t i,
                                                                       std::vector<char>& used) {
        if (i == kept.size()) {
          std::size_t n = 0;
          double cost = 0;
          for (std::size_t k = 0; k < kept.size(); ++k) {
            if (cur[k] < g) {
              ++n;
              cost += distance(kept[k]->box.center, f.gts[cur[k]].box.center);
            }
          }
          if (n > best_n || (n == best_n && cost < best_cost)) {
            best_n = n;
            best_cost = cost;
            best = cur;
          }
          return;
        }
        cur[i] = g;
        rec(i + 1, used);
        for (std::size_t j = 0; j < g; ++j) {
          if (used[j] || distance(kept[i]->box.center, f.gts[j].box.center) > gate) continue;
          used[j] = 1;
          cur[i] = j;
          rec(i + 1, used);
          used[j] = 0;
        }
      };
      std::vector<char> used(g, 0);
      best.assign(kept.size(), g);
      rec(0, used);
      c.tp += static_cast<double>(best_n);
      c.fp += static_cast<double>(kept.size() - best_n);
      c.fn += static_cast<double>(g - best_n);
      for (std::size_t k = 0; k < kept.size(); ++k) {
        if (best[k] == g) continue;
        const auto gid = *f.gts[best[k]].track_id;
        const auto pid = *kept[k]->track_id;
        if (last.count(gid) && last[gid] != pid) c.idsw += 1;
        last[gid] = pid;
      }
    }
    return c;
  };
  double total = 0;
  for (std::size_t k = 1; k < points; ++k) {
    const double r = static_cast<double>(k) / static_cast<double>(points - 1);
    for (double s : scores) {
      const Counts c = count(s);
      if (c.tp / static_cast<double>(gt) >= r - 1e-12) {
        const double m = 1.0 - (c.fn + c.fp + c.idsw - (1.0 - r) * gt) / (r * gt);
        total += std::min(1.0, std::max(0.0, m));
        break;
      }
    }
  }
  return total / static_cast<double>(points - 1);
}

std::vector<TrackedFrame> random_tracking_scene(Rng& rng) {
  std::vector<TrackedFrame> frames(3);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (int k = 0; k < 3; ++k) frames[f].gts.push_back(tracked(8.0 * k + 0.5 * f, 0, k));
    for (int k = 0; k < 4; ++k) {
      const double x = 8.0 * rng.index(4) + 0.5 * f + rng.uniform(-1.5, 1.5);
      frames[f].preds.push_back(
          tracked(x, rng.uniform(-1, 1), static_cast<std::int64_t>(rng.index(3)), rng.uniform(0, 1)));
    }
  }
  return frames;
}

TEST(Amota, MatchesExhaustiveOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const auto frames = random_tracking_scene(rng);
    for (std::size_t n : {5u, 11u, 41u}) {
      const double got = amota(frames, {n, 2.0});
      EXPECT_NEAR(got, amota_oracle(frames, n, 2.0), 1e-12);
      EXPECT_GE(got, 0.0);
      EXPECT_LE(got, 1.0);
    }
  }
}

TEST(Amota, RemovingIdentitySwitchNeverHurts) {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<TrackedFrame> frames(3);
    for (std::size_t f = 0; f < 3; ++f) {
      for (int k = 0; k < 3; ++k) {
        frames[f].gts.push_back(tracked(10.0 * k, 0, k));
        if (rng.bernoulli(0.8)) frames[f].preds.push_back(tracked(10.0 * k + 0.3, 0, k, rng.uniform(0, 1)));
      }
    }
    std::vector<TrackedFrame> switched = frames;
    if (switched[2].preds.empty()) continue;
    switched[2].preds[0].track_id = 77;
    EXPECT_GE(amota(frames), amota(switched));
  }
}

OccupancyGrid binary_grid(std::size_t n, const std::vector<std::size_t>& on) {
  OccupancyGrid g = OccupancyGrid::centered(n, n, 1.0);
  for (std::size_t k : on) g.probs[k] = 1.0;
  return g;
}

TEST(GridIou, WorkedValues) {
  const OccupancyGrid a = binary_grid(4, {0, 1, 2, 3, 4});
  const OccupancyGrid b = binary_grid(4, {2, 3, 4, 5, 6});
  EXPECT_EQ(grid_iou(a, a, 100), 1.0);
  EXPECT_EQ(grid_iou(a, binary_grid(4, {10, 11}), 100), 0.0);
  EXPECT_NEAR(grid_iou(a, b, 100), 3.0 / 7.0, 1e-15);
  EXPECT_EQ(grid_iou(a, b, 100), grid_iou(b, a, 100));
  EXPECT_EQ(grid_iou(binary_grid(4, {}), binary_grid(4, {}), 100), 1.0);
  // A 2 m window keeps only the four central cells (5, 6, 9, 10); cell 0 drops out.
  EXPECT_NEAR(grid_iou(binary_grid(4, {5, 9}), binary_grid(4, {0, 5, 6}), 2.0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(grid_iou(a, binary_grid(5, {}), 10), DimensionError);
}

TEST(GridIou, SymmetricOnRandomGrids) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    OccupancyGrid a = OccupancyGrid::centered(10, 10, 2.0), b = a;
    for (auto& v : a.probs) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    for (auto& v : b.probs) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    const double r = rng.uniform(2, 25);
    EXPECT_EQ(grid_iou(a, b, r), grid_iou(b, a, r));
  }
}

TrajectorySet straight(std::size_t modes, std::size_t steps, double dx, double dy) {
  TrajectorySet t(1, modes, steps);
  for (std::size_t m = 0; m < modes; ++m) {
    t.scores(0, m) = 1.0 / static_cast<double>(modes);
    for (std::size_t s = 0; s < steps; ++s) t.at(0, m, s) = {static_cast<double>(s) + dx * (m + 1), dy};
  }
  return t;
}

std::vector<PointSet2D> line(std::size_t steps) {
  PointSet2D p;
  for (std::size_t s = 0; s < steps; ++s) p.push_back({static_cast<double>(s), 0});
  return {p};
}

TEST(MotionErrors, WorkedValues) {
  TrajectorySet exact = straight(3, 12, 5.0, 0.0);
  for (std::size_t s = 0; s < 12; ++s) exact.at(0, 1, s) = line(12)[0][s];
  const MotionErrors e0 = motion_errors(exact, line(12));
  EXPECT_EQ(e0.min_ade, 0.0);
  EXPECT_EQ(e0.min_fde, 0.0);
  EXPECT_EQ(e0.miss_rate, 0.0);

  const MotionErrors e1 = motion_errors(straight(1, 12, 1.0, 0.0), line(12));
  EXPECT_NEAR(e1.min_ade, 1.0, 1e-12);
  EXPECT_NEAR(e1.min_fde, 1.0, 1e-12);
  EXPECT_EQ(e1.miss_rate, 0.0);

  TrajectorySet late = straight(1, 12, 0.0, 0.0);
  late.at(0, 0, 11).x += 3.0;
  const MotionErrors e2 = motion_errors(late, line(12));
  EXPECT_NEAR(e2.min_fde, 3.0, 1e-12);
  EXPECT_NEAR(e2.min_ade, 3.0 / 12.0, 1e-12);
  EXPECT_EQ(e2.miss_rate, 1.0);

  const MotionErrors none = motion_errors(TrajectorySet(0, 6, 12), {});
  EXPECT_TRUE(std::isnan(none.min_ade));
  EXPECT_THROW(motion_errors(straight(1, 12, 0, 0), {}), ContractError);
}

TEST(MotionErrors, MatchesEnumerationOnRandomSets) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t agents = 1 + rng.index(4), modes = 1 + rng.index(6), steps = 1 + rng.index(12);
    TrajectorySet p(agents, modes, steps);
    std::vector<PointSet2D> gt(agents, PointSet2D(steps));
    for (auto& q : p.points) q = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (auto& a : gt)
      for (auto& q : a) q = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    double ade = 0, fde = 0, mr = 0, max_ade = 0;
    for (std::size_t a = 0; a < agents; ++a) {
      std::vector<double> ades, fdes;
      for (std::size_t m = 0; m < modes; ++m) {
        double s = 0;
        for (std::size_t t = 0; t < steps; ++t)
          s += std::hypot(p.at(a, m, t).x - gt[a][t].x, p.at(a, m, t).y - gt[a][t].y);
        ades.push_back(s / steps);
        fdes.push_back(std::hypot(p.at(a, m, steps - 1).x - gt[a].back().x,
                                  p.at(a, m, steps - 1).y - gt[a].back().y));
      }
      ade += *std::min_element(ades.begin(), ades.end());
      max_ade += *std::max_element(ades.begin(), ades.end());
      const double f = *std::min_element(fdes.begin(), fdes.end());
      fde += f;
      mr += f > 2.0 ? 1 : 0;
    }
    const MotionErrors e = motion_errors(p, gt, 2.0);
    EXPECT_NEAR(e.min_ade, ade / agents, 1e-12);
    EXPECT_NEAR(e.min_fde, fde / agents, 1e-12);
    EXPECT_NEAR(e.miss_rate, mr / agents, 1e-12);
    EXPECT_LE(e.min_ade, max_ade / agents);
    EXPECT_GE(e.miss_rate, 0.0);
    EXPECT_LE(e.miss_rate, 1.0);
  }
}

PointSet2D forward_plan(double lateral) {
  PointSet2D p;
  for (int t = 1; t <= 6; ++t) p.push_back({2.0 * t, lateral});
  return p;
}

TEST(PlanningErrors, WorkedValues) {
  const PlanningErrors same = planning_errors(forward_plan(0), forward_plan(0), {});
  for (int h = 0; h < 3; ++h) {
    EXPECT_EQ(same.l2[h], 0.0);
    EXPECT_EQ(same.collision[h], 0.0);
  }
  const PlanningErrors shifted = planning_errors(forward_plan(1), forward_plan(0), {});
  for (int h = 0; h < 3; ++h) EXPECT_NEAR(shifted.l2[h], 1.0, 1e-12);
  EXPECT_NEAR(shifted.l2_avg, 1.0, 1e-12);

  std::vector<std::vector<Box>> obstacles(6);
  obstacles[1].push_back(Box{{4.0, 0.0}, 2.0, 2.0, 0.3});  // covers waypoint 2
  const PlanningErrors hit = planning_errors(forward_plan(0), forward_plan(0), obstacles);
  EXPECT_EQ(hit.collision[0], 1.0);
  EXPECT_EQ(hit.collision[1], 1.0);
  EXPECT_EQ(hit.collision[2], 1.0);
  EXPECT_EQ(hit.collision_avg, 1.0);

  std::vector<std::vector<Box>> late(6);
  late[5].push_back(Box{{12.0, 0.0}, 1.0, 1.0, 0.0});
  const PlanningErrors at3 = planning_errors(forward_plan(0), forward_plan(0), late);
  EXPECT_EQ(at3.collision[0], 0.0);
  EXPECT_EQ(at3.collision[1], 0.0);
  EXPECT_EQ(at3.collision[2], 1.0);
  EXPECT_NEAR(at3.collision_avg, 1.0 / 3.0, 1e-15);
}

TEST(PlanningErrors, MatchesPerStepEnumeration) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    PointSet2D plan(6), expert(6);
    for (auto& p : plan) p = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
    for (auto& p : expert) p = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
    std::vector<std::vector<Box>> obs(6);
    for (auto& o : obs)
      if (rng.bernoulli(0.3)) o.push_back(Box{{rng.uniform(-10, 10), rng.uniform(-10, 10)}, 4, 2, rng.uniform(-3, 3)});
    const PlanningErrors e = planning_errors(plan, expert, obs);
    double cum = 0;
    bool hit = false;
    double heading = 0;
    Point2 prev{0, 0};
    for (std::size_t t = 0; t < 6; ++t) {
      cum += std::hypot(plan[t].x - expert[t].x, plan[t].y - expert[t].y);
      heading = std::atan2(plan[t].y - prev.y, plan[t].x - prev.x);
      prev = plan[t];
      for (const auto& b : obs[t]) hit = hit || intersection_area(Box{plan[t], 4.0, 1.8, heading}, b) > 0;
      if (t % 2 == 1) {
        EXPECT_NEAR(e.l2[t / 2], cum / (t + 1), 1e-12);
        EXPECT_EQ(e.collision[t / 2], hit ? 1.0 : 0.0);
      }
    }
  }
}

TEST(Report, JsonRoundTripAndAverage) {
  MetricsReport a;
  a.map = 0.25;
  a.min_ade = std::nan("");
  MetricsReport b;
  b.map = 0.75;
  b.min_ade = 2.0;
  const MetricsReport m = average({a, b});
  EXPECT_EQ(m.map, 0.5);
  EXPECT_EQ(m.min_ade, 2.0);
  EXPECT_TRUE(to_json(a)["minADE"].is_null());
  EXPECT_EQ(report_values(report_from_json(to_json(b))), report_values(b));
  EXPECT_EQ(report_columns().size(), report_values(b).size());
}

}  // namespace
}  // namespace v2x
