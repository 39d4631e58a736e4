#include "v2x/fusion/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace v2x {

namespace {

void require_kind(const QueryVars& q, QueryKind kind, const char* op) {
  if (q.kind != kind) {
    throw ContractError(std::string(op) + ": expected " + to_string(kind) + " queries, got " +
                        to_string(q.kind));
  }
}

void require_dim(const QueryVars& q, std::size_t d, const char* op) {
  if (q.count() > 0 && q.queries.cols() != d) {
    throw DimensionError(std::string(op) + ": query dim " + std::to_string(q.queries.cols()) +
                         ", expected " + std::to_string(d));
  }
}

ad::Var repeat_row(ad::Tape& tape, const Matrix& row, std::size_t n) {
  Matrix m(n, row.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < row.cols(); ++j) m(i, j) = row(0, j);
  return tape.constant(std::move(m));
}

ad::Var join(const ad::Var& a, const ad::Var& b) {
  if (b.rows() == 0) return a;
  if (a.rows() == 0) return b;
  return ad::concat_rows({a, b});
}

// Eq. 4 mechanism: other-agent queries with the relative pose appended, through an MLP.
ad::Var align(ad::Tape& tape, const FusionParams& p, const PerceptronBlock& mlp,
              const RigidTransform2D& t, const ad::Var& queries) {
  const Matrix rf = scaled_rot_feature(t, p.position_scale);
  return perceptron(tape, mlp, ad::concat_cols({queries, repeat_row(tape, rf, queries.rows())}));
}

}  // namespace

FusionParams make_fusion_params(std::size_t d, std::size_t heads, double position_scale, Rng& rng) {
  FusionParams p;
  p.track_align = make_perceptron(d + 6, d, d, rng);
  p.pos_embed = make_perceptron(2, d, d, rng);
  p.track_attn = make_attention(d, heads, rng);
  p.map_align = make_perceptron(d + 6, d, d, rng);
  p.map_fuse = make_perceptron(2 * d, d, d, rng);
  p.anchor_embed = make_perceptron(2 + 6, d, d, rng);
  p.traj_embed = make_perceptron(2 * d, d, d, rng);
  p.traj_self = make_attention(d, heads, rng);
  p.traj_cross = make_attention(d, heads, rng);
  p.position_scale = position_scale;
  return p;
}

Matrix scaled_rot_feature(const RigidTransform2D& t, double position_scale) {
  Matrix f = rot_feature(t);
  f(0, 4) /= position_scale;
  f(0, 5) /= position_scale;
  return f;
}

ad::Var transform_refs(ad::Tape& tape, const RigidTransform2D& t, const ad::Var& refs) {
  if (refs.rows() == 0) return refs;
  const auto& r = t.rotation();
  const Matrix rt{{r[0], r[2]}, {r[1], r[3]}};
  return ad::add_row(ad::matmul(refs, tape.constant(rt)),
                     tape.constant(Matrix{{t.translation().x, t.translation().y}}));
}

QueryVars track_fusion(ad::Tape& tape, const FusionParams& p, const RigidTransform2D& other_to_ego,
                       const QueryVars& ego, const QueryVars& other) {
  require_kind(ego, QueryKind::track, "track_fusion");
  require_kind(other, QueryKind::track, "track_fusion");
  const std::size_t d = p.model_dim();
  require_dim(ego, d, "track_fusion");
  require_dim(other, d, "track_fusion");
  QueryVars out;
  out.kind = QueryKind::track;
  out.agent = ego.agent;
  ad::Var x = ego.queries;
  ad::Var refs = ego.refs;
  ad::Var scores = ego.scores;
  if (other.count() > 0) {
    x = join(x, align(tape, p, p.track_align, other_to_ego, other.queries));
    refs = join(refs, transform_refs(tape, other_to_ego, other.refs));
    scores = join(scores, other.scores);
  }
  if (x.rows() == 0) {
    out.queries = tape.constant(Matrix(0, d));
    out.refs = tape.constant(Matrix(0, 2));
    out.scores = tape.constant(Matrix(0, 1));
    return out;
  }
  ad::Var pos = perceptron(tape, p.pos_embed, ad::scale(refs, 1.0 / p.position_scale));
  out.queries = self_attention(tape, p.track_attn, ad::add(x, pos));
  out.refs = refs;
  out.scores = scores;
  return out;
}

QueryVars map_fusion(ad::Tape& tape, const FusionParams& p, const RigidTransform2D& other_to_ego,
                     const QueryVars& ego, const QueryVars& other) {
  require_kind(ego, QueryKind::map, "map_fusion");
  require_kind(other, QueryKind::map, "map_fusion");
  if (ego.count() != other.count()) {
    throw ContractError("map_fusion: " + std::to_string(ego.count()) + " ego queries vs " +
                        std::to_string(other.count()) + " other queries");
  }
  const std::size_t d = p.model_dim();
  require_dim(ego, d, "map_fusion");
  require_dim(other, d, "map_fusion");
  QueryVars out = ego;
  if (ego.count() == 0) return out;
  ad::Var aligned = align(tape, p, p.map_align, other_to_ego, other.queries);
  out.queries = perceptron(tape, p.map_fuse, ad::concat_cols({ego.queries, aligned}));
  return out;
}

QueryVars traj_fusion(ad::Tape& tape, const FusionParams& p, const RigidTransform2D& other_to_ego,
                      const QueryVars& ego, const QueryVars& other, const QueryVars& tracks) {
  require_kind(ego, QueryKind::motion, "traj_fusion");
  require_kind(other, QueryKind::motion, "traj_fusion");
  if (tracks.count() == 0) throw ContractError("traj_fusion: fused track queries are empty");
  const std::size_t d = p.model_dim();
  require_dim(ego, d, "traj_fusion");
  require_dim(other, d, "traj_fusion");
  require_dim(tracks, d, "traj_fusion");
  QueryVars out;
  out.kind = QueryKind::motion;
  out.agent = ego.agent;
  ad::Var f = ego.queries;
  ad::Var refs = ego.refs;
  ad::Var scores = ego.scores;
  if (other.count() > 0) {
    const Matrix rf = scaled_rot_feature(other_to_ego, p.position_scale);
    ad::Var pm = perceptron(tape, p.anchor_embed,
                            ad::concat_cols({ad::scale(other.refs, 1.0 / p.position_scale),
                                             repeat_row(tape, rf, other.count())}));
    f = join(f, perceptron(tape, p.traj_embed, ad::concat_cols({other.queries, pm})));
    refs = join(refs, transform_refs(tape, other_to_ego, other.refs));
    scores = join(scores, other.scores);
  }
  if (f.rows() == 0) {
    out.queries = tape.constant(Matrix(0, d));
    out.refs = tape.constant(Matrix(0, 2));
    out.scores = tape.constant(Matrix(0, 1));
    return out;
  }
  out.queries = attention(tape, p.traj_cross, self_attention(tape, p.traj_self, f), tracks.queries);
  out.refs = refs;
  out.scores = scores;
  return out;
}

QuerySet track_fusion(const FusionParams& p, const RigidTransform2D& other_to_ego,
                      const QuerySet& ego, const QuerySet& other) {
  ad::Tape tape;
  return snapshot(track_fusion(tape, p, other_to_ego, constant_queries(tape, ego),
                               constant_queries(tape, other)));
}

QuerySet map_fusion(const FusionParams& p, const RigidTransform2D& other_to_ego,
                    const QuerySet& ego, const QuerySet& other) {
  ad::Tape tape;
  return snapshot(map_fusion(tape, p, other_to_ego, constant_queries(tape, ego),
                             constant_queries(tape, other)));
}

QuerySet traj_fusion(const FusionParams& p, const RigidTransform2D& other_to_ego,
                     const QuerySet& ego, const QuerySet& other, const QuerySet& tracks) {
  ad::Tape tape;
  return snapshot(traj_fusion(tape, p, other_to_ego, constant_queries(tape, ego),
                              constant_queries(tape, other), constant_queries(tape, tracks)));
}

OccupancyGrid occ_max(const OccupancyGrid& a, const OccupancyGrid& b) {
  if (!a.same_layout(b)) throw DimensionError("occ_max: grid layouts differ");
  OccupancyGrid out = a;
  for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] = std::max(a.probs[i], b.probs[i]);
  return out;
}

FusedOccupancy occ_fusion(const OccupancyGrid& ego, const OccupancyGrid& other,
                          const RigidTransform2D& other_to_ego, double tau) {
  FusedOccupancy f;
  if (other.empty()) {
    f.probability = ego;
  } else {
    if (std::abs(other.cell_size - ego.cell_size) > 1e-6 * ego.cell_size) {
      throw DimensionError("occ_fusion: cell size " + std::to_string(other.cell_size) + " vs ego " +
                           std::to_string(ego.cell_size));
    }
    f.probability = occ_max(ego, resample(other, other_to_ego, ego));
  }
  f.binary = threshold(f.probability, tau);
  return f;
}

}  // namespace v2x
