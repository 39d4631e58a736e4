#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "unit/oracles.hpp"
#include "v2x/fusion/fusion.hpp"
#include "v2x/numerics/grad_check.hpp"

namespace v2x {
namespace {

constexpr std::size_t kDim = 4;

QuerySet random_set(QueryKind kind, std::size_t n, Rng& rng, std::size_t d = kDim) {
  QuerySet q;
  q.kind = kind;
  q.queries = rng.uniform_matrix(n, d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    q.refs.push_back({rng.uniform(-30, 30), rng.uniform(-30, 30)});
    q.scores.push_back(rng.uniform(0, 1));
  }
  return q;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
  }
  return out;
}

Matrix vcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) out(a.rows() + i, j) = b(i, j);
  return out;
}

// Pose features [r00 r01 r10 r11 tx/s ty/s] on every row.
Matrix pose_rows(const RigidTransform2D& t, double s, std::size_t n) {
  const auto& r = t.rotation();
  Matrix m(n, 6);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < 4; ++k) m(i, k) = r[k];
    m(i, 4) = t.translation().x / s;
    m(i, 5) = t.translation().y / s;
  }
  return m;
}

Matrix refs_matrix(const PointSet2D& pts, const RigidTransform2D& t, double s) {
  Matrix m(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& r = t.rotation();
    m(i, 0) = (r[0] * pts[i].x + r[1] * pts[i].y + t.translation().x) / s;
    m(i, 1) = (r[2] * pts[i].x + r[3] * pts[i].y + t.translation().y) / s;
  }
  return m;
}

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

class Fusion : public ::testing::Test {
 protected:
  Rng rng{7};
  FusionParams p = make_fusion_params(kDim, 2, 51.2, rng);
  RigidTransform2D pose{0.7, {12.0, -4.0}};
};

TEST_F(Fusion, TrackFusionMatchesOracle) {
  for (const RigidTransform2D& t : {RigidTransform2D::identity(), pose}) {
    const QuerySet ego = random_set(QueryKind::track, 2, rng);
    const QuerySet other = random_set(QueryKind::track, 2, rng);
    const QuerySet out = track_fusion(p, t, ego, other);
    const Matrix aligned =
        oracle::naive_perceptron(p.track_align, hcat(other.queries, pose_rows(t, 51.2, 2)));
    const Matrix x = vcat(ego.queries, aligned);
    const Matrix refs = vcat(refs_matrix(ego.refs, RigidTransform2D::identity(), 51.2),
                             refs_matrix(other.refs, t, 51.2));
    const Matrix pos = oracle::naive_perceptron(p.pos_embed, refs);
    Matrix in = x;
    for (std::size_t i = 0; i < in.size(); ++i) in[i] += pos[i];
    expect_near(out.queries, oracle::naive_attention(p.track_attn, in, in), 1e-12);
    ASSERT_EQ(out.refs.size(), 4u);
    EXPECT_EQ(out.refs[0], ego.refs[0]);
    EXPECT_EQ(out.refs[1], ego.refs[1]);
    EXPECT_EQ(out.refs[2], t.apply(other.refs[0]));
    EXPECT_EQ(out.refs[3], t.apply(other.refs[1]));
    EXPECT_EQ(out.scores, (std::vector<double>{ego.scores[0], ego.scores[1], other.scores[0],
                                               other.scores[1]}));
  }
}

TEST_F(Fusion, TrackFusionWithEmptyOtherUsesEgoRowsOnly) {
  const QuerySet ego = random_set(QueryKind::track, 3, rng);
  const QuerySet out = track_fusion(p, pose, ego, empty_queries(QueryKind::track, kDim));
  const Matrix pos = oracle::naive_perceptron(p.pos_embed, refs_matrix(ego.refs, {}, 51.2));
  Matrix in = ego.queries;
  for (std::size_t i = 0; i < in.size(); ++i) in[i] += pos[i];
  expect_near(out.queries, oracle::naive_attention(p.track_attn, in, in), 1e-12);
  EXPECT_EQ(out.refs, ego.refs);
  EXPECT_EQ(out.count(), 3u);
}

TEST_F(Fusion, TrackFusionRowCountIsSum) {
  for (std::size_t a : {0u, 1u, 5u})
    for (std::size_t b : {0u, 2u, 7u}) {
      const QuerySet out =
          track_fusion(p, pose, random_set(QueryKind::track, a, rng), random_set(QueryKind::track, b, rng));
      EXPECT_EQ(out.count(), a + b);
      EXPECT_EQ(out.refs.size(), a + b);
      EXPECT_EQ(out.scores.size(), a + b);
    }
}

TEST_F(Fusion, TrackFusionRejectsMismatch) {
  EXPECT_THROW(track_fusion(p, pose, random_set(QueryKind::track, 2, rng),
                            random_set(QueryKind::track, 2, rng, 6)),
               DimensionError);
  EXPECT_THROW(track_fusion(p, pose, random_set(QueryKind::map, 2, rng),
                            random_set(QueryKind::track, 2, rng)),
               ContractError);
}

TEST_F(Fusion, TrackFusionIsPermutationEquivariant) {
  const QuerySet ego = random_set(QueryKind::track, 3, rng);
  const QuerySet other = random_set(QueryKind::track, 3, rng);
  const QuerySet out = track_fusion(p, pose, ego, other);
  // Reverse each block; output rows follow.
  QuerySet e2 = ego, o2 = other;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < kDim; ++j) {
      e2.queries(i, j) = ego.queries(2 - i, j);
      o2.queries(i, j) = other.queries(2 - i, j);
    }
    e2.refs[i] = ego.refs[2 - i];
    o2.refs[i] = other.refs[2 - i];
    e2.scores[i] = ego.scores[2 - i];
    o2.scores[i] = other.scores[2 - i];
  }
  const QuerySet out2 = track_fusion(p, pose, e2, o2);
  const std::size_t perm[6] = {2, 1, 0, 5, 4, 3};
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < kDim; ++j)
      EXPECT_EQ(out2.queries(i, j), out.queries(perm[i], j));
    EXPECT_EQ(out2.refs[i], out.refs[perm[i]]);
  }
}

TEST_F(Fusion, MapFusionZeroWeightsGiveBias) {
  p.map_fuse = zero_perceptron(2 * kDim, kDim, kDim);
  p.map_fuse.b2 = Matrix{{1.0, -2.0, 3.0, 0.5}};
  const QuerySet out = map_fusion(p, pose, random_set(QueryKind::map, 3, rng),
                                  random_set(QueryKind::map, 3, rng));
  ASSERT_EQ(out.count(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < kDim; ++j) EXPECT_EQ(out.queries(i, j), p.map_fuse.b2(0, j));
}

TEST_F(Fusion, MapFusionMatchesOracle) {
  const QuerySet ego = random_set(QueryKind::map, 3, rng);
  const QuerySet other = random_set(QueryKind::map, 3, rng);
  const QuerySet out = map_fusion(p, pose, ego, other);
  const Matrix aligned =
      oracle::naive_perceptron(p.map_align, hcat(other.queries, pose_rows(pose, 51.2, 3)));
  expect_near(out.queries, oracle::naive_perceptron(p.map_fuse, hcat(ego.queries, aligned)), 1e-12);
  EXPECT_EQ(out.refs, ego.refs);
  EXPECT_EQ(out.scores, ego.scores);
  EXPECT_THROW(map_fusion(p, pose, ego, random_set(QueryKind::map, 2, rng)), ContractError);
}

TEST_F(Fusion, TrajFusionMatchesOracle) {
  const QuerySet ego = random_set(QueryKind::motion, 6, rng);
  const QuerySet other = random_set(QueryKind::motion, 6, rng);
  const QuerySet tracks = random_set(QueryKind::track, 4, rng);
  const QuerySet out = traj_fusion(p, pose, ego, other, tracks);
  const Matrix pm = oracle::naive_perceptron(
      p.anchor_embed, hcat(refs_matrix(other.refs, {}, 51.2), pose_rows(pose, 51.2, 6)));
  const Matrix emb = oracle::naive_perceptron(p.traj_embed, hcat(other.queries, pm));
  const Matrix f = vcat(ego.queries, emb);
  const Matrix sa = oracle::naive_attention(p.traj_self, f, f);
  expect_near(out.queries, oracle::naive_attention(p.traj_cross, sa, tracks.queries), 1e-12);
  ASSERT_EQ(out.count(), 12u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(out.refs[i], ego.refs[i]);
    EXPECT_EQ(out.refs[6 + i], pose.apply(other.refs[i]));
  }
}

TEST_F(Fusion, TrajFusionWithEmptyOther) {
  const QuerySet ego = random_set(QueryKind::motion, 6, rng);
  const QuerySet tracks = random_set(QueryKind::track, 3, rng);
  const QuerySet out = traj_fusion(p, pose, ego, empty_queries(QueryKind::motion, kDim), tracks);
  expect_near(out.queries, mhca(p.traj_cross, mhsa(p.traj_self, ego.queries), tracks.queries), 0.0);
  EXPECT_THROW(traj_fusion(p, pose, ego, ego, empty_queries(QueryKind::track, kDim)), ContractError);
}

TEST_F(Fusion, GradientsOfTrackAndTrajFusion) {
  const QuerySet ego = random_set(QueryKind::track, 3, rng);
  const QuerySet other = random_set(QueryKind::track, 3, rng);
  const QuerySet me = random_set(QueryKind::motion, 6, rng);
  const QuerySet mo = random_set(QueryKind::motion, 6, rng);
  const Matrix w1 = rng.uniform_matrix(6, kDim, 1.0);
  const Matrix w2 = rng.uniform_matrix(12, kDim, 1.0);
  std::vector<NamedParameter> params;
  visit_parameters(p, "fusion", [&](const std::string& n, Matrix& m) { params.emplace_back(n, &m); });
  const auto track = grad_check(
      [&](ad::Tape& tape) {
        QueryVars q = track_fusion(tape, p, pose, constant_queries(tape, ego), constant_queries(tape, other));
        return ad::sum(ad::mul(q.queries, tape.constant(w1)));
      },
      params, 1e-5);
  EXPECT_LT(track.max_relative_error, 1e-5) << track.worst_parameter;
  const auto traj = grad_check(
      [&](ad::Tape& tape) {
        QueryVars t = track_fusion(tape, p, pose, constant_queries(tape, ego), constant_queries(tape, other));
        QueryVars q = traj_fusion(tape, p, pose, constant_queries(tape, me), constant_queries(tape, mo), t);
        return ad::sum(ad::mul(q.queries, tape.constant(w2)));
      },
      params, 1e-5);
  EXPECT_LT(traj.max_relative_error, 1e-5) << traj.worst_parameter;
}

OccupancyGrid grid_of(std::vector<double> probs, std::size_t n = 2) {
  OccupancyGrid g = OccupancyGrid::centered(n, n, 1.0);
  g.probs = std::move(probs);
  return g;
}

TEST(OccFusion, MaxThenThreshold) {
  const FusedOccupancy f =
      occ_fusion(grid_of({0.2, 0.0, 0.05, 0.3}), grid_of({0.7, 0.05, 0.0, 0.1}), {});
  EXPECT_EQ(f.probability.probs, (std::vector<double>{0.7, 0.05, 0.05, 0.3}));
  EXPECT_EQ(f.binary.probs, (std::vector<double>{1.0, 0.0, 0.0, 1.0}));
}

TEST(OccFusion, ZeroOtherLeavesEgo) {
  Rng rng(1);
  OccupancyGrid ego = OccupancyGrid::centered(6, 6, 0.5);
  for (double& v : ego.probs) v = rng.uniform(0, 1);
  const OccupancyGrid zero = OccupancyGrid::centered(6, 6, 0.5);
  EXPECT_EQ(occ_fusion(ego, zero, RigidTransform2D(0.4, {1.0, 2.0})).probability, ego);
  EXPECT_EQ(occ_fusion(ego, OccupancyGrid{}, {}).probability, ego);
}

TEST(OccFusion, LowProbabilityThresholdsToZero) {
  const FusedOccupancy f = occ_fusion(grid_of({0.05, 0.05, 0.05, 0.05}), grid_of({0.05, 0.05, 0.05, 0.05}), {});
  for (double v : f.binary.probs) EXPECT_EQ(v, 0.0);
}

TEST(OccFusion, ResolutionMismatchRejected) {
  OccupancyGrid other = OccupancyGrid::centered(2, 2, 2.0);
  EXPECT_THROW(occ_fusion(grid_of({0, 0, 0, 0}), other, {}), DimensionError);
}

TEST(OccFusion, IdentityResampleIsExactCopy) {
  Rng rng(2);
  OccupancyGrid g = OccupancyGrid::centered(16, 16, 6.4);
  for (double& v : g.probs) v = rng.uniform(0, 1);
  EXPECT_EQ(resample(g, {}, g), g);
}

TEST(OccFusion, Algebra) {
  Rng rng(3);
  auto random_grid = [&] {
    OccupancyGrid g = OccupancyGrid::centered(5, 5, 1.0);
    for (double& v : g.probs) v = rng.bernoulli(0.2) ? 0.0 : rng.uniform(0, 1);
    return g;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const OccupancyGrid a = random_grid(), b = random_grid(), c = random_grid();
    const auto fuse = [](const OccupancyGrid& x, const OccupancyGrid& y) {
      return occ_fusion(x, y, {}).probability;
    };
    EXPECT_EQ(fuse(a, b), fuse(b, a));
    EXPECT_EQ(fuse(fuse(a, b), c), fuse(a, fuse(b, c)));
    EXPECT_EQ(fuse(a, a), a);
    OccupancyGrid a2 = a;
    for (double& v : a2.probs) v = std::min(1.0, v + rng.uniform(0, 0.3));
    const OccupancyGrid lo = fuse(a, b), hi = fuse(a2, b);
    for (std::size_t i = 0; i < lo.probs.size(); ++i) EXPECT_LE(lo.probs[i], hi.probs[i]);
  }
}

}  // namespace
}  // namespace v2x
