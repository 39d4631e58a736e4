#include "v2x/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace v2x {

namespace {

double evaluate(const LossFunction& loss) {
  ad::Tape tape;
  const ad::Var out = loss(tape);
  if (out.rows() != 1 || out.cols() != 1) throw DimensionError("grad_check: loss must be 1x1");
  const double v = out.value()(0, 0);
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss");
  return v;
}

}  // namespace

GradCheckResult grad_check(const LossFunction& loss, const std::vector<NamedParameter>& params,
                           double eps) {
  if (!(eps > 0.0 && eps <= 1e-3)) throw std::invalid_argument("grad_check: eps must be in (0, 1e-3]");

  std::vector<Matrix> analytic;
  double result_loss = 0.0;
  {
    ad::Tape tape(true);
    const ad::Var out = loss(tape);
    if (!std::isfinite(out.value()(0, 0))) throw NumericError("grad_check: non-finite loss");
    result_loss = out.value()(0, 0);
    tape.backward(out);
    for (const auto& [name, p] : params) analytic.push_back(tape.param_grad(*p));
  }

  GradCheckResult result;
  result.loss = result_loss;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Matrix& p = *params[pi].second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double plus = evaluate(loss);
      p[i] = saved - eps;
      const double minus = evaluate(loss);
      p[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coordinates;
      result.relative_errors.push_back(rel);
      result.absolute_errors.push_back(std::abs(a - numeric));
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = params[pi].first;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

std::pair<double, double> directional_check(const LossFunction& loss,
                                            const std::vector<NamedParameter>& params,
                                            const std::vector<Matrix>& direction, double eps) {
  if (!(eps > 0.0 && eps <= 1e-3)) throw std::invalid_argument("directional_check: bad eps");
  if (direction.size() != params.size()) throw DimensionError("directional_check: one direction per parameter");
  double analytic = 0.0;
  {
    ad::Tape tape(true);
    const ad::Var out = loss(tape);
    tape.backward(out);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      const Matrix g = tape.param_grad(*params[pi].second);
      if (g.rows() != direction[pi].rows() || g.cols() != direction[pi].cols()) {
        throw DimensionError("directional_check: direction shape for " + params[pi].first);
      }
      for (std::size_t i = 0; i < g.size(); ++i) analytic += g[i] * direction[pi][i];
    }
  }
  std::vector<Matrix> saved;
  for (const auto& [name, p] : params) saved.push_back(*p);
  auto shift = [&](double s) {
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      Matrix& p = *params[pi].second;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = saved[pi][i] + s * direction[pi][i];
    }
  };
  shift(eps);
  const double plus = evaluate(loss);
  shift(-eps);
  const double minus = evaluate(loss);
  for (std::size_t pi = 0; pi < params.size(); ++pi) *params[pi].second = saved[pi];
  return {analytic, (plus - minus) / (2.0 * eps)};
}

}  // namespace v2x
