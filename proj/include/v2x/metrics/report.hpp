#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace v2x {

struct MetricsReport {
  double map = 0.0;  // detection mAP
  double amota = 0.0;
  double lane_iou = 0.0;
  double crossing_iou = 0.0;
  double occ_iou_near = 0.0;
  double occ_iou_far = 0.0;
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
  std::array<double, 3> l2{};
  double l2_avg = 0.0;
  std::array<double, 3> collision{};
  double collision_avg = 0.0;
  double bps = 0.0;
};

// Field-wise mean; NaN entries are skipped and a field that is NaN everywhere stays NaN.
MetricsReport average(const std::vector<MetricsReport>& reports);

// NaN is written as null.
nlohmann::json to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

std::vector<std::string> report_columns();
std::vector<double> report_values(const MetricsReport& r);

// Shortest decimal text that reads back to the same double; "nan" for NaN.
std::string format_number(double v);

}  // namespace v2x
