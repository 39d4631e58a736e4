#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2x/harness/pipeline.hpp"

namespace v2x {

// Mean report over a scenario batch, runs ordered by scenario seed.
MetricsReport evaluate_batch(const std::vector<Scenario>& scenarios, const RunConfig& cfg,
                             const CooperativeParams& params);

struct TrainResult {
  std::vector<LossBreakdown> history;  // one entry per step, before its update
  LossBreakdown final_loss;            // after the last update
  std::vector<RoutingStats> routing;   // at the final parameters, first scenario
};

// Plain gradient descent on the batch-mean joint loss over the trainable parameters.
// Throws NumericError on a non-finite parameter, loss or gradient.
TrainResult train(CooperativeParams& params, const std::vector<Scenario>& scenarios,
                  const RunConfig& cfg, std::size_t steps, double lr);

// Fresh parameters from cfg.seed trained on one scenario.
TrainResult train_smoke(const Scenario& scn, const RunConfig& cfg, std::size_t steps, double lr);

// The reference micro scene: 2 agents, 8x8 BEV, D=16, E=4, k=2, balance weight 10.
constexpr double kSmokeLearningRate = 0.005;
struct SmokeSetup {
  Scenario scenario;
  RunConfig config;
};
SmokeSetup smoke_setup(std::uint64_t seed = 2);

// Toggle order: perception fusion, prediction fusion, MoE encoder, MoE decoder.
std::vector<RunConfig> toggle_grid(const RunConfig& base);

struct AblationRow {
  bool p_level = false;
  bool m_level = false;
  bool moe_encoder = false;
  bool moe_decoder = false;
  RunConfig config;
  MetricsReport report;
};

struct AblationOptions {
  std::size_t train_steps = 0;
  double lr = 0.0;
};

const std::vector<std::string>& ablation_columns();
std::array<double, 8> ablation_values(const MetricsReport& r);

// One row per config in grid order; identical configs are rejected.
std::vector<AblationRow> ablate(const std::vector<RunConfig>& grid, const std::vector<Scenario>& scenarios,
                                const AblationOptions& options = {});

struct SweepPoint {
  double budget = 0.0;  // bytes per second
  MetricsReport report;
};

// Budgets must be ascending and nonnegative; all points share one parameter set.
std::vector<SweepPoint> bandwidth_sweep(const std::vector<double>& budgets, const RunConfig& cfg,
                                        const std::vector<Scenario>& scenarios);

void write_csv(std::ostream& os, const std::vector<AblationRow>& rows);
void write_csv(std::ostream& os, const std::vector<SweepPoint>& curve);
nlohmann::json to_json(const std::vector<AblationRow>& rows);
nlohmann::json to_json(const std::vector<SweepPoint>& curve);
nlohmann::json to_json(const TrainResult& r);
nlohmann::json to_json(const LossBreakdown& l);

}  // namespace v2x
