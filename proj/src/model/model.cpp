#include "v2x/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace v2x {

namespace {

// C(2s + c, 2t + c) = 1 for s <= t: row vector times C gives running sums per coordinate.
Matrix cumsum_matrix(std::size_t steps) {
  Matrix c(2 * steps, 2 * steps);
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t t = s; t < steps; ++t)
      for (std::size_t k = 0; k < 2; ++k) c(2 * s + k, 2 * t + k) = 1.0;
  return c;
}

// Repeats an (x, y) row across steps.
Matrix tile_matrix(std::size_t steps) {
  Matrix m(2, 2 * steps);
  for (std::size_t t = 0; t < steps; ++t) {
    m(0, 2 * t) = 1.0;
    m(1, 2 * t + 1) = 1.0;
  }
  return m;
}

ad::Var decode_refs(ad::Tape& tape, const AgentModel& model, const LinearBlock& head,
                    const ad::Var& queries) {
  const Point2 c = model.range.center();
  const Point2 h = model.range.half_extent();
  const std::size_t n = queries.rows();
  Matrix half(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    half(i, 0) = h.x;
    half(i, 1) = h.y;
  }
  ad::Var unit = ad::tanh(linear(tape, head, queries));
  return ad::add_row(ad::mul(unit, tape.constant(std::move(half))),
                     tape.constant(Matrix{{c.x, c.y}}));
}

QueryVars decode_queries(ad::Tape& tape, const AgentModel& model, QueryKind kind,
                         const ad::Var& queries, const LinearBlock& ref_head,
                         const LinearBlock& score_head) {
  QueryVars q;
  q.kind = kind;
  q.queries = queries;
  q.refs = decode_refs(tape, model, ref_head, queries);
  q.logits = linear(tape, score_head, queries);
  q.scores = ad::sigmoid(q.logits);
  return q;
}

}  // namespace

QueryVars decode_heads(ad::Tape& tape, const AgentModel& model, QueryKind kind,
                       const ad::Var& queries) {
  if (kind == QueryKind::track) {
    return decode_queries(tape, model, kind, queries, model.track_ref, model.track_score);
  }
  if (kind == QueryKind::map) {
    return decode_queries(tape, model, kind, queries, model.map_ref, model.map_score);
  }
  throw ContractError("decode_heads: motion queries have no perception heads");
}

namespace {

ad::Var zero_scalar(ad::Tape& tape) { return tape.constant(Matrix(1, 1)); }

}  // namespace

QueryVars constant_queries(ad::Tape& tape, const QuerySet& qs) {
  qs.validate();
  QueryVars q;
  q.kind = qs.kind;
  q.agent = qs.agent;
  q.queries = tape.constant(qs.queries);
  q.refs = tape.constant(qs.refs.empty() ? Matrix(0, 2) : to_matrix(qs.refs));
  Matrix s(qs.count(), 1);
  for (std::size_t i = 0; i < qs.count(); ++i) s(i, 0) = qs.scores[i];
  q.scores = tape.constant(std::move(s));
  return q;
}

QuerySet snapshot(const QueryVars& qv) {
  QuerySet qs;
  qs.kind = qv.kind;
  qs.agent = qv.agent;
  qs.queries = qv.queries.value();
  qs.refs = to_points(qv.refs.value());
  const Matrix& s = qv.scores.value();
  qs.scores.assign(s.data().begin(), s.data().end());
  return qs;
}

ad::Var encoder_layer(ad::Tape& tape, const EncoderLayer& layer, const ad::Var& tokens,
                      const ad::Var& context, std::vector<MoeTrace>* traces) {
  ad::Var x = ad::add(tokens, self_attention(tape, layer.self_attn, tokens));
  x = ad::add(x, attention(tape, layer.cross_attn, x, context));
  MoeTrace trace = moe(tape, layer.moe, x);
  ad::Var out = trace.output;
  if (traces) traces->push_back(std::move(trace));
  return out;
}

EncoderTrace run_encoder(ad::Tape& tape, const std::vector<EncoderLayer>& layers,
                         const ad::Var& tokens, const ad::Var& context) {
  EncoderTrace out;
  out.tokens = tokens;
  out.balance = zero_scalar(tape);
  for (const auto& layer : layers) {
    std::vector<MoeTrace> traces;
    out.tokens = encoder_layer(tape, layer, out.tokens, context, &traces);
    out.balance = ad::add(out.balance, balance_loss(tape, traces.front(), layer.moe.lambda));
    out.routing.push_back(traces.front().stats);
  }
  return out;
}

ad::Var sensor_context(ad::Tape& tape, const AgentModel& model, const Matrix& features) {
  if (features.cols() != model.config.sensor_features) {
    throw DimensionError("sensor features " + features.shape_string() + ", expected " +
                         std::to_string(model.config.sensor_features) + " columns");
  }
  if (features.rows() == 0) throw ContractError("sensor context needs at least one row");
  return linear(tape, model.context_proj, tape.constant(features));
}

ad::Var initial_bev(ad::Tape& tape, const AgentModel& model) {
  return tape.param(model.bev_embed);
}

HeadsTrace perception_heads(ad::Tape& tape, const AgentModel& model, const ad::Var& bev_tokens) {
  const std::size_t cells = model.config.bev_height * model.config.bev_width;
  if (bev_tokens.rows() != cells || bev_tokens.cols() != model.config.model_dim) {
    throw DimensionError("bev tokens " + bev_tokens.value().shape_string() + " for " +
                         std::to_string(cells) + " cells");
  }
  HeadsTrace h;
  ad::Var tq = attention(tape, model.track_attn, tape.param(model.track_embed), bev_tokens);
  h.track = decode_queries(tape, model, QueryKind::track, tq, model.track_ref, model.track_score);
  ad::Var mq = attention(tape, model.map_attn, tape.param(model.map_embed), bev_tokens);
  h.map = decode_queries(tape, model, QueryKind::map, mq, model.map_ref, model.map_score);
  h.occ_logits = linear(tape, model.occ_head, bev_tokens);
  return h;
}

OccupancyGrid occupancy_from_logits(const AgentModel& model, const Matrix& logits) {
  OccupancyGrid g = OccupancyGrid::zeros(model.config.bev_height, model.config.bev_width,
                                         model.cell_size(), {model.range.min_x, model.range.min_y});
  if (logits.size() != g.probs.size()) throw DimensionError("occupancy logits " + logits.shape_string());
  for (std::size_t i = 0; i < g.probs.size(); ++i) {
    const double x = logits[i];
    g.probs[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return g;
}

ad::Var decode_positions(ad::Tape& tape, const AgentModel& model, const ad::Var& queries,
                         const ad::Var& anchors_per_row) {
  const std::size_t steps = model.config.steps;
  ad::Var offsets = linear(tape, model.traj_head, queries);
  ad::Var base = ad::matmul(anchors_per_row, tape.constant(tile_matrix(steps)));
  return ad::add(base, ad::matmul(offsets, tape.constant(cumsum_matrix(steps))));
}

ad::Var decode_mode_probs(ad::Tape& tape, const AgentModel& model, const ad::Var& queries,
                          std::size_t agents) {
  const std::size_t modes = model.config.modes;
  ad::Var logits = ad::reshape(linear(tape, model.mode_head, queries), agents, modes);
  return ad::reshape(ad::softmax_rows(logits), agents * modes, 1);
}

MotionTrace motion_decoder(ad::Tape& tape, const AgentModel& model, const QueryVars& tracks,
                           const ad::Var& bev_tokens) {
  const ModelConfig& c = model.config;
  const std::size_t d = c.model_dim;
  MotionTrace out;
  out.balance = zero_scalar(tape);
  const std::size_t n = tracks.count();
  if (n == 0) {
    out.motion.kind = QueryKind::motion;
    out.motion.agent = tracks.agent;
    out.motion.queries = tape.constant(Matrix(0, d));
    out.motion.refs = tape.constant(Matrix(0, 2));
    out.motion.scores = tape.constant(Matrix(0, 1));
    out.positions = tape.constant(Matrix(0, 2 * c.steps));
    out.mode_probs = out.motion.scores;
    out.anchors = Matrix(0, 2);
    return out;
  }
  const Matrix& scores = tracks.scores.value();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores(a, 0) > scores(b, 0); });
  const std::size_t agents = std::min(c.motion_agents, n);
  out.track_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(agents));
  out.agents = agents;

  ad::Var anchors = ad::gather_rows(tracks.refs, out.track_rows);
  out.anchors = anchors.value();
  ad::Var agent_feat =
      ad::add(ad::gather_rows(tracks.queries, out.track_rows),
              perceptron(tape, model.anchor_embed, ad::scale(anchors, 1.0 / c.position_scale)));
  std::vector<std::size_t> agent_of_row, mode_of_row;
  for (std::size_t a = 0; a < agents; ++a) {
    for (std::size_t m = 0; m < c.modes; ++m) {
      agent_of_row.push_back(a);
      mode_of_row.push_back(m);
    }
  }
  ad::Var q = ad::add(ad::gather_rows(agent_feat, agent_of_row),
                      ad::gather_rows(tape.param(model.mode_embed), mode_of_row));
  for (const auto& layer : model.decoder) {
    std::vector<ad::Var> per_agent;
    for (std::size_t a = 0; a < agents; ++a) {
      per_agent.push_back(
          self_attention(tape, layer.self_attn, ad::slice_rows(q, a * c.modes, (a + 1) * c.modes)));
    }
    q = ad::add(q, per_agent.size() == 1 ? per_agent.front() : ad::concat_rows(per_agent));
    q = ad::add(q, attention(tape, layer.cross_attn, q, bev_tokens));
    MoeTrace trace = moe(tape, layer.moe, q);
    q = trace.output;
    out.balance = ad::add(out.balance, balance_loss(tape, trace, layer.moe.lambda));
    out.routing.push_back(std::move(trace.stats));
  }
  ad::Var anchor_rows = ad::gather_rows(anchors, agent_of_row);
  out.positions = decode_positions(tape, model, q, anchor_rows);
  out.mode_probs = decode_mode_probs(tape, model, q, agents);
  out.motion.kind = QueryKind::motion;
  out.motion.agent = tracks.agent;
  out.motion.queries = q;
  out.motion.refs = anchor_rows;
  out.motion.scores = out.mode_probs;
  return out;
}

TrajectorySet to_trajectories(const Matrix& positions, const Matrix& mode_probs,
                              std::size_t agents, std::size_t modes, std::size_t steps) {
  if (positions.rows() != agents * modes || positions.cols() != 2 * steps ||
      mode_probs.size() != agents * modes) {
    throw DimensionError("trajectory decode shapes " + positions.shape_string());
  }
  TrajectorySet t(agents, modes, steps);
  for (std::size_t a = 0; a < agents; ++a) {
    for (std::size_t m = 0; m < modes; ++m) {
      const std::size_t r = a * modes + m;
      t.scores(a, m) = mode_probs[r];
      for (std::size_t s = 0; s < steps; ++s) {
        t.at(a, m, s) = {positions(r, 2 * s), positions(r, 2 * s + 1)};
      }
    }
  }
  return t;
}

ad::Var planner_head(ad::Tape& tape, const AgentModel& model, const ad::Var& motion_queries) {
  if (motion_queries.rows() == 0) throw ContractError("planner needs motion queries");
  const std::size_t p = model.config.plan_steps;
  ad::Var pooled = attention(tape, model.plan_attn, tape.param(model.ego_query), motion_queries);
  ad::Var offsets = perceptron(tape, model.plan_head, pooled);
  return ad::reshape(ad::matmul(offsets, tape.constant(cumsum_matrix(p))), p, 2);
}

BevState encoder_layer(const BevState& state, const Matrix& context, const EncoderLayer& layer,
                       RoutingStats* stats) {
  state.validate();
  ad::Tape tape;
  std::vector<MoeTrace> traces;
  ad::Var out = encoder_layer(tape, layer, tape.constant(state.tokens), tape.constant(context),
                              &traces);
  if (stats) *stats = traces.front().stats;
  BevState next = state;
  next.tokens = out.value();
  return next;
}

std::pair<BevState, double> run_encoder(const BevState& state, const Matrix& context,
                                        const std::vector<EncoderLayer>& layers) {
  state.validate();
  ad::Tape tape;
  EncoderTrace trace =
      run_encoder(tape, layers, tape.constant(state.tokens), tape.constant(context));
  BevState next = state;
  next.tokens = trace.tokens.value();
  return {next, trace.balance.value()(0, 0)};
}

PerceptionOutput perception_heads(const AgentModel& model, const BevState& state) {
  state.validate();
  ad::Tape tape;
  HeadsTrace h = perception_heads(tape, model, tape.constant(state.tokens));
  return {snapshot(h.track), snapshot(h.map), occupancy_from_logits(model, h.occ_logits.value())};
}

std::pair<QuerySet, TrajectorySet> motion_decoder(const AgentModel& model, const QuerySet& tracks,
                                                  const BevState& state) {
  ad::Tape tape;
  MotionTrace m = motion_decoder(tape, model, constant_queries(tape, tracks),
                                 tape.constant(state.tokens));
  return {snapshot(m.motion), to_trajectories(m.positions.value(), m.mode_probs.value(), m.agents,
                                              model.config.modes, model.config.steps)};
}

PointSet2D planner_head(const AgentModel& model, const QuerySet& motion) {
  ad::Tape tape;
  return to_points(planner_head(tape, model, tape.constant(motion.queries)).value());
}

}  // namespace v2x
