#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "v2x/harness/experiments.hpp"
#include "v2x/harness/files.hpp"
#include "v2x/harness/gradient_suite.hpp"
#include "v2x/model/checkpoint.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace v2x;

namespace {

const char* error_type(const std::exception& e) {
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
  if (dynamic_cast<const ContractError*>(&e)) return "ContractError";
  if (dynamic_cast<const DecodeError*>(&e)) return "DecodeError";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
  return "Error";
}

int fail(const std::string& type, const std::string& message, int code) {
  std::cout << json{{"error", {{"type", type}, {"message", message}}}}.dump() << std::endl;
  return code;
}

void emit(const json& j) { std::cout << j.dump(2) << std::endl; }

RunConfig load_config(const std::string& path) {
  return path.empty() ? RunConfig{} : run_config_from_json(read_json_file(path));
}

double parse_budget(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad budget '" + s + "'");
  return v;
}

std::string report_csv(const MetricsReport& r) {
  std::ostringstream os;
  const auto cols = report_columns();
  const json j = to_json(r);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (std::size_t i = 0; i < cols.size(); ++i) {
    os << (i ? "," : "");
    if (j.at(cols[i]).is_null()) {
      os << "nan";
    } else {
      os << j.at(cols[i]).dump();
    }
  }
  os << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative V2X perception, prediction and planning toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int difficulty = 1;
  std::string config_path, out_dir, checkpoint_in;
  auto* simulate = app.add_subcommand("simulate", "Run the cooperative pipeline on one synthetic scene");
  simulate->add_option("--seed", seed, "Scenario seed")->required();
  simulate->add_option("--difficulty", difficulty, "Occlusion level, 0 = all agents visible to ego");
  simulate->add_option("--config", config_path, "Run config JSON");
  simulate->add_option("--checkpoint", checkpoint_in, "Parameter checkpoint to load");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  std::string grid_path, csv_path;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the fusion / MoE toggle grid");
  ablate_cmd->add_option("--grid", grid_path, "Grid JSON")->required();
  ablate_cmd->add_option("--csv", csv_path, "Also write the table as CSV");

  std::string budgets_arg;
  std::size_t n_scenarios = 4;
  auto* sweep = app.add_subcommand("sweep", "Metrics under a range of channel budgets");
  sweep->add_option("--budgets", budgets_arg, "Ascending bytes per second, comma separated; 'inf' allowed")
      ->required();
  sweep->add_option("--config", config_path, "Run config JSON");
  sweep->add_option("--scenarios", n_scenarios, "Number of scenes");
  sweep->add_option("--seed", seed, "First scene seed");
  sweep->add_option("--difficulty", difficulty, "Occlusion level");
  sweep->add_option("--csv", csv_path, "Also write the curve as CSV");

  GradSuiteConfig gcfg;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--seed", gcfg.seed, "Input seed");
  gradcheck->add_option("--eps", gcfg.eps, "Central difference step");
  gradcheck->add_option("--tolerance", gcfg.tolerance, "Relative error tolerance");

  std::size_t steps = 200;
  double lr = kSmokeLearningRate;
  std::string checkpoint_out;
  std::uint64_t smoke_seed = 2;
  auto* train_cmd = app.add_subcommand("train-smoke", "Gradient descent on the micro scene");
  train_cmd->add_option("--steps", steps, "Gradient steps");
  train_cmd->add_option("--lr", lr, "Learning rate");
  train_cmd->add_option("--seed", smoke_seed, "Scene and initialisation seed");
  train_cmd->add_option("--checkpoint", checkpoint_out, "Write trained parameters here");
  train_cmd->add_option("--csv", csv_path, "Write the loss history as CSV");

  std::string pred_path, gt_path;
  EvalSettings settings;
  auto* metrics = app.add_subcommand("metrics", "Score a prediction file against a ground-truth file");
  metrics->add_option("--pred", pred_path, "Prediction JSON")->required();
  metrics->add_option("--gt", gt_path, "Ground-truth JSON")->required();
  metrics->add_option("--threshold", settings.detection_threshold, "Detection score threshold");
  metrics->add_option("--far-range", settings.far_range, "Full evaluation range in meters");

  std::string messages_path;
  double frequency = 2.0;
  auto* bps_cmd = app.add_subcommand("bps", "Transmission cost of a message log");
  bps_cmd->add_option("--messages", messages_path, "Length-prefixed message log")->required();
  bps_cmd->add_option("--frequency", frequency, "Messages per second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), 2);
  }

  try {
    if (*simulate) {
      RunConfig cfg = load_config(config_path);
      ScenarioConfig sc;
      sc.steps = cfg.model.steps;
      sc.plan_steps = cfg.model.plan_steps;
      const Scenario scn = gen_scenario(seed, difficulty, sc);
      CooperativeParams params = make_params(cfg, sc);
      if (!checkpoint_in.empty()) restore_parameters(params, "", read_checkpoint(checkpoint_in));
      const auto t0 = std::chrono::steady_clock::now();
      const RunResult r = run_pipeline(scn, cfg, params);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      write_text_file(dir / "scenario.json", to_json(scn).dump(2));
      write_text_file(dir / "config.json", to_json(cfg).dump(2));
      write_text_file(dir / "prediction.json", to_json(eval_prediction(r.outputs, cfg, params)).dump());
      write_text_file(dir / "truth.json", to_json(eval_truth(scn, params.ego)).dump());
      write_text_file(dir / "report.json", to_json(r.report).dump(2));
      write_text_file(dir / "report.csv", report_csv(r.report));
      write_text_file(dir / "loss.json", to_json(r.loss).dump(2));
      write_text_file(dir / "messages.bin", encode_message_log(r.outputs.delivered));
      write_checkpoint(dir / "params.ckpt", collect_parameters(params, ""));
      emit({{"report", to_json(r.report)},
            {"loss", to_json(r.loss)},
            {"messages", r.outputs.delivered.size()},
            {"seconds", seconds},
            {"out", out_dir}});
    } else if (*ablate_cmd) {
      const json grid = read_json_file(grid_path);
      for (const auto& [k, v] : grid.items()) {
        if (k != "base" && k != "configs" && k != "scenarios" && k != "train_steps" && k != "lr") {
          throw ContractError("unknown key '" + k + "' in grid");
        }
      }
      const RunConfig base = run_config_from_json(grid.value("base", json::object()));
      std::vector<RunConfig> configs;
      if (grid.contains("configs")) {
        for (const auto& c : grid.at("configs")) configs.push_back(run_config_from_json(c));
      } else {
        configs = toggle_grid(base);
      }
      ScenarioBatchSpec spec = batch_spec_from_json(grid.value("scenarios", json::object()));
      spec.config.steps = base.model.steps;
      spec.config.plan_steps = base.model.plan_steps;
      AblationOptions opt{grid.value("train_steps", std::size_t{0}), grid.value("lr", 0.0)};
      const auto rows = ablate(configs, make_batch(spec), opt);
      if (!csv_path.empty()) {
        std::ostringstream os;
        write_csv(os, rows);
        write_text_file(csv_path, os.str());
      }
      emit({{"columns", ablation_columns()}, {"rows", to_json(rows)}});
    } else if (*sweep) {
      const RunConfig cfg = load_config(config_path);
      std::vector<double> budgets;
      std::stringstream ss(budgets_arg);
      for (std::string item; std::getline(ss, item, ',');) budgets.push_back(parse_budget(item));
      ScenarioBatchSpec spec;
      spec.count = n_scenarios;
      spec.seed = seed;
      spec.difficulty = difficulty;
      spec.config.steps = cfg.model.steps;
      spec.config.plan_steps = cfg.model.plan_steps;
      const auto curve = bandwidth_sweep(budgets, cfg, make_batch(spec));
      if (!csv_path.empty()) {
        std::ostringstream os;
        write_csv(os, curve);
        write_text_file(csv_path, os.str());
      }
      emit({{"curve", to_json(curve)}});
    } else if (*gradcheck) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto entries = gradient_suite(gcfg);
      json arr = json::array();
      bool all = true;
      for (const auto& e : entries) {
        arr.push_back(to_json(e));
        all = all && e.pass;
      }
      emit({{"eps", gcfg.eps},
            {"tolerance", gcfg.tolerance},
            {"checks", arr},
            {"all_pass", all},
            {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}});
    } else if (*train_cmd) {
      const SmokeSetup s = smoke_setup(smoke_seed);
      CooperativeParams params = make_params(s.config, s.scenario.config);
      const auto t0 = std::chrono::steady_clock::now();
      const TrainResult r = train(params, {s.scenario}, s.config, steps, lr);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!checkpoint_out.empty()) write_checkpoint(checkpoint_out, collect_parameters(params, ""));
      if (!csv_path.empty()) {
        std::ostringstream os;
        os << "step,track,map,occ,mot,plan,moe,total\n";
        for (std::size_t i = 0; i < r.history.size(); ++i) {
          const auto& l = r.history[i];
          os << i << ',' << l.track << ',' << l.map << ',' << l.occ << ',' << l.mot << ',' << l.plan << ','
             << l.moe << ',' << l.total << '\n';
        }
        write_text_file(csv_path, os.str());
      }
      json j = to_json(r);
      j["initial_total"] = r.history.front().total;
      j["final_total"] = r.final_loss.total;
      j["reduction"] = 1.0 - r.final_loss.total / r.history.front().total;
      j["seconds"] = seconds;
      j.erase("history");
      emit(j);
    } else if (*metrics) {
      const EvalPrediction pred = prediction_from_json(read_json_file(pred_path));
      const EvalTruth gt = truth_from_json(read_json_file(gt_path));
      emit(to_json(compute_metrics(pred, gt, settings)));
    } else if (*bps_cmd) {
      const auto msgs = decode_message_log(read_binary_file(messages_path));
      json per = json::array();
      for (const auto& m : msgs) {
        per.push_back({{"kind", static_cast<int>(m.kind)}, {"payload_bytes", m.payload_bytes()}});
      }
      emit({{"bps", bps(msgs, frequency)}, {"frequency_hz", frequency}, {"messages", per}});
    }
  } catch (const std::exception& e) {
    return fail(error_type(e), e.what(), 1);
  }
  return 0;
}
