#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2x/numerics/grad_check.hpp"

namespace v2x {

struct GradSuiteEntry {
  std::string name;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  std::string worst_parameter;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t above_tolerance = 0;
  // Worst |analytic - numeric| in units of ulp(loss) / eps, the resolution of
  // a central difference on this loss.
  double worst_in_resolution_units = 0.0;
  // Relative mismatch of the directional derivative along a random direction.
  double directional_error = 0.0;
  bool pass = false;  // max_relative_error < tolerance
};

struct GradSuiteConfig {
  double eps = 1e-5;
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
};

// Perceptron, attention, MoE, encoder layer, track fusion, trajectory fusion and
// the end-to-end cooperative joint loss on seeded micro inputs.
std::vector<GradSuiteEntry> gradient_suite(const GradSuiteConfig& config = {});

nlohmann::json to_json(const GradSuiteEntry& e);

}  // namespace v2x
