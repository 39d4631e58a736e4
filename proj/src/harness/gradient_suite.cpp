#include "v2x/harness/gradient_suite.hpp"

#include <algorithm>
#include <cmath>

#include "v2x/fusion/fusion.hpp"
#include "v2x/harness/pipeline.hpp"
#include "v2x/model/model.hpp"

namespace v2x {

namespace {

GradSuiteEntry run_check(const std::string& name, const LossFunction& f,
                         const std::vector<NamedParameter>& params, const GradSuiteConfig& cfg,
                         Rng& rng) {
  const GradCheckResult r = grad_check(f, params, cfg.eps);
  GradSuiteEntry e;
  e.name = name;
  e.coordinates = r.coordinates;
  e.max_relative_error = r.max_relative_error;
  e.worst_parameter = r.worst_parameter;
  e.worst_analytic = r.worst_analytic;
  e.worst_numeric = r.worst_numeric;
  const double resolution = (std::nextafter(r.loss, INFINITY) - r.loss) / cfg.eps;
  for (std::size_t i = 0; i < r.coordinates; ++i) {
    if (r.relative_errors[i] >= cfg.tolerance) ++e.above_tolerance;
    e.worst_in_resolution_units = std::max(e.worst_in_resolution_units, r.absolute_errors[i] / resolution);
  }
  std::vector<Matrix> dir;
  for (const auto& [n, p] : params) dir.push_back(rng.uniform_matrix(p->rows(), p->cols(), 1.0));
  const auto [analytic, numeric] = directional_check(f, params, dir, cfg.eps);
  e.directional_error = std::abs(analytic - numeric) / std::max(std::abs(analytic), 1e-300);
  e.pass = r.max_relative_error < cfg.tolerance;
  return e;
}

template <class Owner>
std::vector<NamedParameter> collect(Owner& owner, const std::string& prefix) {
  std::vector<NamedParameter> out;
  visit_parameters(owner, prefix, [&](const std::string& n, Matrix& m) { out.emplace_back(n, &m); });
  return out;
}

ad::Var weighted_sum(ad::Tape& tape, const ad::Var& x, const Matrix& w) {
  return ad::sum(ad::mul(x, tape.constant(w)));
}

QuerySet random_queries(QueryKind kind, std::size_t n, std::size_t d, Rng& rng) {
  QuerySet q;
  q.kind = kind;
  q.queries = rng.uniform_matrix(n, d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    q.refs.push_back({rng.uniform(-30, 30), rng.uniform(-30, 30)});
    q.scores.push_back(rng.uniform(0.05, 0.95));
  }
  return q;
}

}  // namespace

std::vector<GradSuiteEntry> gradient_suite(const GradSuiteConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<GradSuiteEntry> out;
  constexpr std::size_t d = 6;

  {
    PerceptronBlock b = make_perceptron(d, 7, 5, rng);
    const Matrix x = rng.uniform_matrix(4, d, 1.0);
    const Matrix w = rng.uniform_matrix(4, 5, 1.0);
    out.push_back(run_check("perceptron",
                            [&](ad::Tape& t) { return weighted_sum(t, perceptron(t, b, t.constant(x)), w); },
                            collect(b, "perceptron"), cfg, rng));
  }
  {
    AttentionBlock b = make_attention(d, 2, rng);
    const Matrix q = rng.uniform_matrix(3, d, 1.0);
    const Matrix kv = rng.uniform_matrix(5, d, 1.0);
    const Matrix w = rng.uniform_matrix(3, d, 1.0);
    out.push_back(run_check(
        "attention",
        [&](ad::Tape& t) { return weighted_sum(t, attention(t, b, t.constant(q), t.constant(kv)), w); },
        collect(b, "attention"), cfg, rng));
  }
  {
    MoeLayer layer = make_moe(d, 7, d, 4, 2, 0.03, rng);
    const Matrix x = rng.uniform_matrix(5, d, 1.0);
    const Matrix w = rng.uniform_matrix(5, d, 1.0);
    out.push_back(run_check("moe",
                            [&](ad::Tape& t) {
                              MoeTrace tr = moe(t, layer, t.constant(x));
                              return ad::add(weighted_sum(t, tr.output, w), balance_loss(t, tr, layer.lambda));
                            },
                            collect(layer, "moe"), cfg, rng));
  }
  {
    EncoderLayer layer{make_attention(d, 2, rng), make_attention(d, 2, rng), make_moe(d, 7, d, 4, 2, 0.03, rng)};
    const Matrix tokens = rng.uniform_matrix(4, d, 1.0);
    const Matrix ctx = rng.uniform_matrix(3, d, 1.0);
    const Matrix w = rng.uniform_matrix(4, d, 1.0);
    std::vector<NamedParameter> params;
    visit_parameters(layer, "enc", [&](const std::string& n, Matrix& m) { params.emplace_back(n, &m); });
    out.push_back(run_check("encoder_layer",
                            [&](ad::Tape& t) {
                              return weighted_sum(
                                  t, encoder_layer(t, layer, t.constant(tokens), t.constant(ctx)), w);
                            },
                            params, cfg, rng));
  }
  {
    FusionParams p = make_fusion_params(d, 2, 51.2, rng);
    const RigidTransform2D pose(0.4, {3.0, -2.0});
    const QuerySet ego = random_queries(QueryKind::track, 3, d, rng);
    const QuerySet other = random_queries(QueryKind::track, 2, d, rng);
    const QuerySet me = random_queries(QueryKind::motion, 4, d, rng);
    const QuerySet mo = random_queries(QueryKind::motion, 3, d, rng);
    const Matrix w1 = rng.uniform_matrix(5, d, 1.0);
    const Matrix w2 = rng.uniform_matrix(7, d, 1.0);
    const auto params = collect(p, "fusion");
    out.push_back(run_check("track_fusion",
                            [&](ad::Tape& t) {
                              QueryVars q = track_fusion(t, p, pose, constant_queries(t, ego),
                                                         constant_queries(t, other));
                              return weighted_sum(t, q.queries, w1);
                            },
                            params, cfg, rng));
    out.push_back(run_check("traj_fusion",
                            [&](ad::Tape& t) {
                              QueryVars tr = track_fusion(t, p, pose, constant_queries(t, ego),
                                                          constant_queries(t, other));
                              QueryVars q = traj_fusion(t, p, pose, constant_queries(t, me),
                                                        constant_queries(t, mo), tr);
                              return weighted_sum(t, q.queries, w2);
                            },
                            params, cfg, rng));
  }
  {
    RunConfig rc;
    ModelConfig& m = rc.model;
    m.model_dim = 8;
    m.heads = 2;
    m.bev_height = 4;
    m.bev_width = 4;
    m.encoder_layers = 1;
    m.decoder_layers = 1;
    m.experts = 4;
    m.top_k = 2;
    m.expert_hidden = 8;
    m.track_queries = 3;
    m.map_queries = 2;
    m.motion_agents = 2;
    m.modes = 3;
    rc.seed = cfg.seed;
    ScenarioConfig sc;
    sc.min_agents = 2;
    sc.max_agents = 2;
    const Scenario scn = gen_scenario(cfg.seed, 1, sc);
    CooperativeParams params = make_params(rc, sc);
    out.push_back(run_check("joint_loss",
                            [&](ad::Tape& t) { return pipeline_forward(t, scn, rc, params).loss.total; },
                            trainable_parameters(params), cfg, rng));
  }
  return out;
}

nlohmann::json to_json(const GradSuiteEntry& e) {
  return {{"name", e.name},
          {"coordinates", e.coordinates},
          {"max_relative_error", e.max_relative_error},
          {"worst_parameter", e.worst_parameter},
          {"worst_analytic", e.worst_analytic},
          {"worst_numeric", e.worst_numeric},
          {"above_tolerance", e.above_tolerance},
          {"worst_in_resolution_units", e.worst_in_resolution_units},
          {"directional_error", e.directional_error},
          {"pass", e.pass}};
}

}  // namespace v2x
