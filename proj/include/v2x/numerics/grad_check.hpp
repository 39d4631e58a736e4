#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "v2x/numerics/tape.hpp"

namespace v2x {

using LossFunction = std::function<ad::Var(ad::Tape&)>;
using NamedParameter = std::pair<std::string, Matrix*>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  double loss = 0.0;
  std::vector<double> relative_errors;  // per coordinate, parameter order
  std::vector<double> absolute_errors;
};

// Compares tape gradients of a scalar loss with central finite differences on
// every coordinate of every listed parameter. The relative error uses the
// denominator max(|analytic|, |numeric|, 1e-8). Parameters are perturbed in
// place and restored before returning.
GradCheckResult grad_check(const LossFunction& loss, const std::vector<NamedParameter>& params,
                           double eps);

// Central difference of the loss along direction (one matrix per parameter)
// against the tape's directional derivative. Returns {analytic, numeric}.
std::pair<double, double> directional_check(const LossFunction& loss,
                                            const std::vector<NamedParameter>& params,
                                            const std::vector<Matrix>& direction, double eps);

}  // namespace v2x
