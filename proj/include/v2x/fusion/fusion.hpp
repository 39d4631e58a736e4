#pragma once

#include <string>

#include "v2x/geometry/occupancy_grid.hpp"
#include "v2x/model/model.hpp"

namespace v2x {

// Learned weights of the four fusion operators. The other->ego transform is
// passed per call.
struct FusionParams {
  PerceptronBlock track_align;   // [Q, rot_feature] (D+6) -> D
  PerceptronBlock pos_embed;     // ref (2) -> D, shared by ego and other rows
  AttentionBlock track_attn;
  PerceptronBlock map_align;     // [Q, rot_feature] (D+6) -> D
  PerceptronBlock map_fuse;      // [Q_ego, Q_other] (2D) -> D
  PerceptronBlock anchor_embed;  // [anchor, rot_feature] (2+6) -> D
  PerceptronBlock traj_embed;    // [Q, P_M] (2D) -> D
  AttentionBlock traj_self;
  AttentionBlock traj_cross;
  double position_scale = 51.2;

  std::size_t model_dim() const { return track_attn.model_dim(); }
};

FusionParams make_fusion_params(std::size_t model_dim, std::size_t heads, double position_scale,
                                Rng& rng);

template <class Self, class F>
  requires ParameterOwner<Self, FusionParams>
void visit_parameters(Self& p, const std::string& prefix, F&& fn) {
  visit_parameters(p.track_align, prefix + ".track_align", fn);
  visit_parameters(p.pos_embed, prefix + ".pos_embed", fn);
  visit_parameters(p.track_attn, prefix + ".track_attn", fn);
  visit_parameters(p.map_align, prefix + ".map_align", fn);
  visit_parameters(p.map_fuse, prefix + ".map_fuse", fn);
  visit_parameters(p.anchor_embed, prefix + ".anchor_embed", fn);
  visit_parameters(p.traj_embed, prefix + ".traj_embed", fn);
  visit_parameters(p.traj_self, prefix + ".traj_self", fn);
  visit_parameters(p.traj_cross, prefix + ".traj_cross", fn);
}

// [R, t / position_scale] as a 1x6 row.
Matrix scaled_rot_feature(const RigidTransform2D& t, double position_scale);
// Nx2 refs mapped by t.
ad::Var transform_refs(ad::Tape& tape, const RigidTransform2D& t, const ad::Var& refs);

// Rows: ego then aligned other; refs: ego then transformed other; scores carried.
QueryVars track_fusion(ad::Tape& tape, const FusionParams& p, const RigidTransform2D& other_to_ego,
                       const QueryVars& ego, const QueryVars& other);
// Rowwise MLP over index-paired ego/other rows; refs and scores are the ego ones.
QueryVars map_fusion(ad::Tape& tape, const FusionParams& p, const RigidTransform2D& other_to_ego,
                     const QueryVars& ego, const QueryVars& other);
// mhca(mhsa([ego motion; embedded other motion]), fused track queries).
QueryVars traj_fusion(ad::Tape& tape, const FusionParams& p, const RigidTransform2D& other_to_ego,
                      const QueryVars& ego, const QueryVars& other, const QueryVars& tracks);

QuerySet track_fusion(const FusionParams& p, const RigidTransform2D& other_to_ego,
                      const QuerySet& ego, const QuerySet& other);
QuerySet map_fusion(const FusionParams& p, const RigidTransform2D& other_to_ego,
                    const QuerySet& ego, const QuerySet& other);
QuerySet traj_fusion(const FusionParams& p, const RigidTransform2D& other_to_ego,
                     const QuerySet& ego, const QuerySet& other, const QuerySet& tracks);

inline constexpr double kOccupancyThreshold = 0.1;

struct FusedOccupancy {
  OccupancyGrid probability;  // cellwise max
  OccupancyGrid binary;       // probability > tau

  friend bool operator==(const FusedOccupancy&, const FusedOccupancy&) = default;
};

// Cellwise max of two grids with identical layout.
OccupancyGrid occ_max(const OccupancyGrid& a, const OccupancyGrid& b);
// other is resampled into the ego layout (nearest cell) before the max. An
// empty other grid leaves ego unchanged.
FusedOccupancy occ_fusion(const OccupancyGrid& ego, const OccupancyGrid& other,
                          const RigidTransform2D& other_to_ego, double tau = kOccupancyThreshold);

}  // namespace v2x
