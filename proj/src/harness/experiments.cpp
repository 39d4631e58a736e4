#include "v2x/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace v2x {

namespace {

std::vector<std::size_t> seed_order(const std::vector<Scenario>& scenarios) {
  std::vector<std::size_t> idx(scenarios.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scenarios[a].seed < scenarios[b].seed; });
  return idx;
}

LossBreakdown mean(const std::vector<LossBreakdown>& xs) {
  LossBreakdown m;
  for (const auto& x : xs) {
    m.track += x.track;
    m.map += x.map;
    m.occ += x.occ;
    m.mot += x.mot;
    m.plan += x.plan;
    m.moe += x.moe;
    m.total += x.total;
  }
  const double n = static_cast<double>(xs.size());
  m.track /= n;
  m.map /= n;
  m.occ /= n;
  m.mot /= n;
  m.plan /= n;
  m.moe /= n;
  m.total /= n;
  return m;
}

LossBreakdown batch_loss(const std::vector<Scenario>& scenarios, const RunConfig& cfg,
                         const CooperativeParams& params) {
  std::vector<LossBreakdown> parts;
  for (std::size_t i : seed_order(scenarios)) {
    ad::Tape tape;
    parts.push_back(pipeline_forward(tape, scenarios[i], cfg, params).loss.values());
  }
  return mean(parts);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

MetricsReport evaluate_batch(const std::vector<Scenario>& scenarios, const RunConfig& cfg,
                             const CooperativeParams& params) {
  if (scenarios.empty()) throw ContractError("scenario batch is empty");
  std::vector<MetricsReport> reports;
  for (std::size_t i : seed_order(scenarios)) {
    reports.push_back(run_pipeline(scenarios[i], cfg, params).report);
  }
  return average(reports);
}

TrainResult train(CooperativeParams& params, const std::vector<Scenario>& scenarios,
                  const RunConfig& cfg, std::size_t steps, double lr) {
  if (steps == 0) throw ContractError("train: steps must be at least 1");
  if (scenarios.empty()) throw ContractError("train: scenario batch is empty");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ContractError("train: lr must be finite and nonnegative");
  const std::vector<NamedParameter> trainable = trainable_parameters(params);
  const std::vector<std::size_t> order = seed_order(scenarios);
  const double inv_n = 1.0 / static_cast<double>(scenarios.size());

  TrainResult result;
  for (std::size_t step = 0; step < steps; ++step) {
    for (const auto& [name, p] : trainable) {
      for (std::size_t i = 0; i < p->size(); ++i) {
        if (!std::isfinite((*p)[i])) {
          throw NumericError("train: non-finite parameter " + name + " at step " + std::to_string(step));
        }
      }
    }
    ad::Tape tape(true);
    std::vector<LossBreakdown> parts;
    ad::Var total;
    for (std::size_t k = 0; k < order.size(); ++k) {
      LossTrace lt = pipeline_forward(tape, scenarios[order[k]], cfg, params).loss;
      parts.push_back(lt.values());
      total = k == 0 ? lt.total : ad::add(total, lt.total);
    }
    const LossBreakdown now = mean(parts);
    if (!std::isfinite(now.total)) {
      throw NumericError("train: non-finite loss at step " + std::to_string(step));
    }
    result.history.push_back(now);
    tape.backward(ad::scale(total, inv_n));
    std::vector<Matrix> grads;
    for (const auto& [name, p] : trainable) {
      grads.push_back(tape.param_grad(*p));
      for (std::size_t i = 0; i < grads.back().size(); ++i) {
        if (!std::isfinite(grads.back()[i])) {
          throw NumericError("train: non-finite gradient for " + name + " at step " + std::to_string(step));
        }
      }
    }
    for (std::size_t pi = 0; pi < trainable.size(); ++pi) {
      Matrix& p = *trainable[pi].second;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * grads[pi][i];
    }
  }
  result.final_loss = batch_loss(scenarios, cfg, params);
  if (!std::isfinite(result.final_loss.total)) throw NumericError("train: non-finite final loss");
  ad::Tape tape;
  result.routing = pipeline_forward(tape, scenarios[order.front()], cfg, params).outputs.routing;
  return result;
}

TrainResult train_smoke(const Scenario& scn, const RunConfig& cfg, std::size_t steps, double lr) {
  CooperativeParams params = make_params(cfg, scn.config);
  return train(params, {scn}, cfg, steps, lr);
}

SmokeSetup smoke_setup(std::uint64_t seed) {
  SmokeSetup s;
  ScenarioConfig sc;
  sc.min_agents = 2;
  sc.max_agents = 2;
  s.scenario = gen_scenario(seed, 1, sc);
  ModelConfig& m = s.config.model;
  m.model_dim = 16;
  m.heads = 2;
  m.bev_height = 8;
  m.bev_width = 8;
  m.encoder_layers = 2;
  m.decoder_layers = 1;
  m.experts = 4;
  m.top_k = 2;
  m.expert_hidden = 16;
  m.track_queries = 4;
  m.map_queries = 8;
  m.motion_agents = 2;
  m.lambda = 10.0;
  s.config.seed = seed;
  return s;
}

std::vector<RunConfig> toggle_grid(const RunConfig& base) {
  std::vector<RunConfig> grid;
  for (int mask = 0; mask < 16; ++mask) {
    RunConfig c = base;
    c.perception_fusion = mask & 1;
    c.prediction_fusion = mask & 2;
    c.model.moe_encoder = mask & 4;
    c.model.moe_decoder = mask & 8;
    grid.push_back(c);
  }
  return grid;
}

const std::vector<std::string>& ablation_columns() {
  static const std::vector<std::string> cols{"mAP",   "AMOTA", "minADE", "L2_1s",
                                             "L2_2s", "L2_3s", "L2_avg", "collision_avg"};
  return cols;
}

std::array<double, 8> ablation_values(const MetricsReport& r) {
  return {r.map, r.amota, r.min_ade, r.l2[0], r.l2[1], r.l2[2], r.l2_avg, r.collision_avg};
}

std::vector<AblationRow> ablate(const std::vector<RunConfig>& grid, const std::vector<Scenario>& scenarios,
                                const AblationOptions& options) {
  if (grid.empty()) throw ContractError("ablate: grid is empty");
  if (scenarios.empty()) throw ContractError("ablate: scenario batch is empty");
  std::vector<std::string> seen;
  for (const auto& c : grid) {
    c.validate();
    std::string key = to_json(c).dump();
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ContractError("ablate: duplicate configuration in grid");
    }
    seen.push_back(std::move(key));
  }
  std::vector<AblationRow> rows;
  for (const auto& c : grid) {
    CooperativeParams params = make_params(c, scenarios.front().config);
    if (options.train_steps > 0) train(params, scenarios, c, options.train_steps, options.lr);
    AblationRow row;
    row.p_level = c.perception_fusion;
    row.m_level = c.prediction_fusion;
    row.moe_encoder = c.model.moe_encoder;
    row.moe_decoder = c.model.moe_decoder;
    row.config = c;
    row.report = evaluate_batch(scenarios, c, params);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepPoint> bandwidth_sweep(const std::vector<double>& budgets, const RunConfig& cfg,
                                        const std::vector<Scenario>& scenarios) {
  if (budgets.empty()) throw ContractError("bandwidth_sweep: no budgets");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] >= 0.0)) throw ContractError("bandwidth_sweep: budgets must be nonnegative");
    if (i > 0 && budgets[i] < budgets[i - 1]) throw ContractError("bandwidth_sweep: budgets must ascend");
  }
  if (scenarios.empty()) throw ContractError("bandwidth_sweep: scenario batch is empty");
  const CooperativeParams params = make_params(cfg, scenarios.front().config);
  std::vector<SweepPoint> curve;
  for (double b : budgets) {
    RunConfig c = cfg;
    c.budget.bytes_per_second = b;
    curve.push_back({b, evaluate_batch(scenarios, c, params)});
  }
  return curve;
}

void write_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
  os << "p_level,m_level,moe_encoder,moe_decoder";
  for (const auto& c : ablation_columns()) os << ',' << c;
  os << '\n';
  for (const auto& r : rows) {
    os << r.p_level << ',' << r.m_level << ',' << r.moe_encoder << ',' << r.moe_decoder;
    for (double v : ablation_values(r.report)) os << ',' << fmt(v);
    os << '\n';
  }
}

void write_csv(std::ostream& os, const std::vector<SweepPoint>& curve) {
  os << "budget";
  for (const auto& c : report_columns()) os << ',' << c;
  os << '\n';
  for (const auto& p : curve) {
    os << fmt(p.budget);
    const nlohmann::json j = to_json(p.report);
    for (const auto& c : report_columns()) {
      os << ',' << (j.at(c).is_null() ? std::string("nan") : fmt(j.at(c).get<double>()));
    }
    os << '\n';
  }
}

nlohmann::json to_json(const std::vector<AblationRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json m = nlohmann::json::object();
    const auto vals = ablation_values(r.report);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      m[ablation_columns()[i]] = std::isfinite(vals[i]) ? nlohmann::json(vals[i]) : nlohmann::json(nullptr);
    }
    out.push_back({{"p_level", r.p_level},
                   {"m_level", r.m_level},
                   {"moe_encoder", r.moe_encoder},
                   {"moe_decoder", r.moe_decoder},
                   {"metrics", m},
                   {"report", to_json(r.report)}});
  }
  return out;
}

nlohmann::json to_json(const std::vector<SweepPoint>& curve) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : curve) {
    out.push_back({{"budget", std::isfinite(p.budget) ? nlohmann::json(p.budget) : nlohmann::json(nullptr)},
                   {"report", to_json(p.report)}});
  }
  return out;
}

nlohmann::json to_json(const LossBreakdown& l) {
  return {{"track", l.track}, {"map", l.map}, {"occ", l.occ}, {"mot", l.mot},
          {"plan", l.plan},   {"moe", l.moe}, {"total", l.total}};
}

nlohmann::json to_json(const TrainResult& r) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& l : r.history) hist.push_back(to_json(l));
  nlohmann::json loads = nlohmann::json::array();
  for (const auto& s : r.routing) loads.push_back(s.load);
  return {{"history", hist}, {"final", to_json(r.final_loss)}, {"expert_load", loads}};
}

}  // namespace v2x
