#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "v2x/geometry/rigid_transform.hpp"
#include "v2x/moe/moe_layer.hpp"
#include "v2x/numerics/blocks.hpp"

namespace v2x {

// Axis-aligned perception range in an agent frame.
struct Range {
  double min_x = -51.2;
  double min_y = -51.2;
  double max_x = 51.2;
  double max_y = 51.2;

  Point2 center() const { return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)}; }
  Point2 half_extent() const { return {0.5 * (max_x - min_x), 0.5 * (max_y - min_y)}; }
  bool contains(const Point2& p) const {
    return p.x >= min_x && p.x < max_x && p.y >= min_y && p.y < max_y;
  }
};

struct ModelConfig {
  std::size_t model_dim = 32;
  std::size_t heads = 2;
  std::size_t bev_height = 16;
  std::size_t bev_width = 16;
  std::size_t encoder_layers = 6;
  std::size_t decoder_layers = 3;
  std::size_t experts = 8;
  std::size_t top_k = 2;
  double lambda = 0.03;
  std::size_t expert_hidden = 64;
  bool moe_encoder = true;
  bool moe_decoder = true;
  std::size_t track_queries = 15;
  std::size_t map_queries = 3;
  std::size_t motion_agents = 5;
  std::size_t modes = 6;
  std::size_t steps = 12;
  std::size_t plan_steps = 6;
  std::size_t sensor_features = 10;
  double position_scale = 51.2;  // meters mapped to unit input

  void validate() const;
};

struct EncoderLayer {
  AttentionBlock self_attn;
  AttentionBlock cross_attn;
  MoeLayer moe;
};

struct DecoderLayer {
  AttentionBlock self_attn;
  AttentionBlock cross_attn;
  MoeLayer moe;
};

// Parameters of one agent's stack: BEV encoder, perception heads, motion decoder, planner.
struct AgentModel {
  ModelConfig config;
  Range range;

  Matrix bev_embed;  // (H*W) x D
  LinearBlock context_proj;
  std::vector<EncoderLayer> encoder;

  Matrix track_embed;  // n_track x D
  AttentionBlock track_attn;
  LinearBlock track_ref;    // D -> 2
  LinearBlock track_score;  // D -> 1

  Matrix map_embed;  // n_map x D
  AttentionBlock map_attn;
  LinearBlock map_ref;
  LinearBlock map_score;

  LinearBlock occ_head;  // D -> 1

  Matrix mode_embed;  // modes x D
  PerceptronBlock anchor_embed;  // 2 -> D
  std::vector<DecoderLayer> decoder;
  LinearBlock traj_head;  // D -> 2T
  LinearBlock mode_head;  // D -> 1

  Matrix ego_query;  // 1 x D
  AttentionBlock plan_attn;
  PerceptronBlock plan_head;  // D -> 2P

  double cell_size() const;
};

// Cells must be square: range width / bev_height == range height / bev_width.
AgentModel make_agent_model(const ModelConfig& config, const Range& range, Rng& rng);

MoeLayer make_ffn_layer(const ModelConfig& config, bool use_moe, Rng& rng);

template <class Self, class F>
  requires ParameterOwner<Self, EncoderLayer> || ParameterOwner<Self, DecoderLayer>
void visit_parameters(Self& layer, const std::string& prefix, F&& fn) {
  visit_parameters(layer.self_attn, prefix + ".self", fn);
  visit_parameters(layer.cross_attn, prefix + ".cross", fn);
  visit_parameters(layer.moe, prefix + ".moe", fn);
}

template <class Self, class F>
  requires ParameterOwner<Self, AgentModel>
void visit_parameters(Self& m, const std::string& prefix, F&& fn) {
  fn(prefix + ".bev_embed", m.bev_embed);
  visit_parameters(m.context_proj, prefix + ".context", fn);
  for (std::size_t i = 0; i < m.encoder.size(); ++i) {
    visit_parameters(m.encoder[i], prefix + ".enc" + std::to_string(i), fn);
  }
  fn(prefix + ".track_embed", m.track_embed);
  visit_parameters(m.track_attn, prefix + ".track_attn", fn);
  visit_parameters(m.track_ref, prefix + ".track_ref", fn);
  visit_parameters(m.track_score, prefix + ".track_score", fn);
  fn(prefix + ".map_embed", m.map_embed);
  visit_parameters(m.map_attn, prefix + ".map_attn", fn);
  visit_parameters(m.map_ref, prefix + ".map_ref", fn);
  visit_parameters(m.map_score, prefix + ".map_score", fn);
  visit_parameters(m.occ_head, prefix + ".occ", fn);
  fn(prefix + ".mode_embed", m.mode_embed);
  visit_parameters(m.anchor_embed, prefix + ".anchor", fn);
  for (std::size_t i = 0; i < m.decoder.size(); ++i) {
    visit_parameters(m.decoder[i], prefix + ".dec" + std::to_string(i), fn);
  }
  visit_parameters(m.traj_head, prefix + ".traj", fn);
  visit_parameters(m.mode_head, prefix + ".mode", fn);
  fn(prefix + ".ego_query", m.ego_query);
  visit_parameters(m.plan_attn, prefix + ".plan_attn", fn);
  visit_parameters(m.plan_head, prefix + ".plan", fn);
}

}  // namespace v2x
