#include "v2x/metrics/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace v2x {

namespace {

template <class F>
void for_each_field(MetricsReport& r, F&& fn) {
  fn("mAP", r.map);
  fn("AMOTA", r.amota);
  fn("lane_iou", r.lane_iou);
  fn("crossing_iou", r.crossing_iou);
  fn("occ_iou_near", r.occ_iou_near);
  fn("occ_iou_far", r.occ_iou_far);
  fn("minADE", r.min_ade);
  fn("minFDE", r.min_fde);
  fn("MR", r.miss_rate);
  fn("L2_1s", r.l2[0]);
  fn("L2_2s", r.l2[1]);
  fn("L2_3s", r.l2[2]);
  fn("L2_avg", r.l2_avg);
  fn("collision_1s", r.collision[0]);
  fn("collision_2s", r.collision[1]);
  fn("collision_3s", r.collision[2]);
  fn("collision_avg", r.collision_avg);
  fn("bps", r.bps);
}

}  // namespace

MetricsReport average(const std::vector<MetricsReport>& reports) {
  MetricsReport out;
  std::vector<MetricsReport> copy = reports;
  std::vector<std::vector<double*>> fields(copy.size());
  for (std::size_t i = 0; i < copy.size(); ++i) {
    for_each_field(copy[i], [&](const char*, double& v) { fields[i].push_back(&v); });
  }
  std::size_t k = 0;
  for_each_field(out, [&](const char*, double& v) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& f : fields) {
      if (!std::isnan(*f[k])) {
        s += *f[k];
        ++n;
      }
    }
    v = n == 0 ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(n);
    ++k;
  });
  return out;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = nlohmann::json::object();
  MetricsReport copy = r;
  for_each_field(copy, [&](const char* name, double& v) {
    j[name] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  });
  return j;
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  for_each_field(r, [&](const char* name, double& v) {
    const auto it = j.find(name);
    v = (it == j.end() || it->is_null()) ? std::numeric_limits<double>::quiet_NaN()
                                         : it->get<double>();
  });
  return r;
}

std::vector<std::string> report_columns() {
  std::vector<std::string> names;
  MetricsReport r;
  for_each_field(r, [&](const char* name, double&) { names.emplace_back(name); });
  return names;
}

std::vector<double> report_values(const MetricsReport& r) {
  std::vector<double> values;
  MetricsReport copy = r;
  for_each_field(copy, [&](const char*, double& v) { values.push_back(v); });
  return values;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace v2x
