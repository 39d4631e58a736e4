#include "v2x/model/agent_model.hpp"

#include <cmath>

namespace v2x {

void ModelConfig::validate() const {
  if (model_dim == 0 || heads == 0 || model_dim % heads != 0) {
    throw DimensionError("model dim " + std::to_string(model_dim) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  if (bev_height < 2 || bev_width < 2) throw DimensionError("bev grid must be at least 2x2");
  if (experts == 0 || top_k == 0 || top_k > experts) {
    throw std::invalid_argument("need 1 <= top_k <= experts");
  }
  if (track_queries == 0 || map_queries == 0 || motion_agents == 0 || modes == 0 || steps == 0 ||
      plan_steps == 0) {
    throw std::invalid_argument("query, mode and step counts must be positive");
  }
  if (lambda < 0.0 || !(position_scale > 0.0)) {
    throw std::invalid_argument("lambda must be nonnegative and position scale positive");
  }
}

double AgentModel::cell_size() const {
  return (range.max_x - range.min_x) / static_cast<double>(config.bev_height);
}

MoeLayer make_ffn_layer(const ModelConfig& c, bool use_moe, Rng& rng) {
  if (use_moe) {
    return make_moe(c.model_dim, c.expert_hidden, c.model_dim, c.experts, c.top_k, c.lambda, rng);
  }
  return make_moe(c.model_dim, c.expert_hidden, c.model_dim, 1, 1, c.lambda, rng);
}

AgentModel make_agent_model(const ModelConfig& c, const Range& range, Rng& rng) {
  c.validate();
  const double cx = (range.max_x - range.min_x) / static_cast<double>(c.bev_height);
  const double cy = (range.max_y - range.min_y) / static_cast<double>(c.bev_width);
  if (!(cx > 0.0) || std::abs(cx - cy) > 1e-9 * cx) {
    throw ContractError("perception range must split into square bev cells");
  }
  const std::size_t d = c.model_dim;
  AgentModel m;
  m.config = c;
  m.range = range;
  m.bev_embed = rng.uniform_matrix(c.bev_height * c.bev_width, d, 1.0);
  m.context_proj = make_linear(c.sensor_features, d, rng);
  for (std::size_t i = 0; i < c.encoder_layers; ++i) {
    EncoderLayer layer;
    layer.self_attn = make_attention(d, c.heads, rng);
    layer.cross_attn = make_attention(d, c.heads, rng);
    layer.moe = make_ffn_layer(c, c.moe_encoder, rng);
    m.encoder.push_back(std::move(layer));
  }
  m.track_embed = rng.uniform_matrix(c.track_queries, d, 1.0);
  m.track_attn = make_attention(d, c.heads, rng);
  m.track_ref = make_linear(d, 2, rng);
  m.track_score = make_linear(d, 1, rng);
  m.map_embed = rng.uniform_matrix(c.map_queries, d, 1.0);
  m.map_attn = make_attention(d, c.heads, rng);
  m.map_ref = make_linear(d, 2, rng);
  m.map_score = make_linear(d, 1, rng);
  m.occ_head = make_linear(d, 1, rng);
  m.mode_embed = rng.uniform_matrix(c.modes, d, 1.0);
  m.anchor_embed = make_perceptron(2, d, d, rng);
  for (std::size_t i = 0; i < c.decoder_layers; ++i) {
    DecoderLayer layer;
    layer.self_attn = make_attention(d, c.heads, rng);
    layer.cross_attn = make_attention(d, c.heads, rng);
    layer.moe = make_ffn_layer(c, c.moe_decoder, rng);
    m.decoder.push_back(std::move(layer));
  }
  m.traj_head = make_linear(d, 2 * c.steps, rng);
  m.mode_head = make_linear(d, 1, rng);
  m.ego_query = rng.uniform_matrix(1, d, 1.0);
  m.plan_attn = make_attention(d, c.heads, rng);
  m.plan_head = make_perceptron(d, d, 2 * c.plan_steps, rng);
  return m;
}

}  // namespace v2x
