#include "v2x/moe/moe_layer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace v2x {

void MoeLayer::validate() const {
  const std::size_t e = expert_count();
  if (e == 0 || top_k < 1 || top_k > e) {
    throw std::invalid_argument("moe: need 1 <= k <= E, got k=" + std::to_string(top_k) +
                                ", E=" + std::to_string(e));
  }
  if (lambda < 0.0) throw std::invalid_argument("moe: lambda must be nonnegative");
  if (gate.cols() != e) throw DimensionError("moe: gate " + gate.shape_string());
  for (const auto& ex : experts) {
    ex.validate();
    if (ex.input_dim() != input_dim() || ex.output_dim() != output_dim()) {
      throw DimensionError("moe: experts must share input/output dims");
    }
  }
}

MoeLayer make_moe(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                  std::size_t experts, std::size_t top_k, double lambda, Rng& rng) {
  MoeLayer layer;
  for (std::size_t e = 0; e < experts; ++e) {
    layer.experts.push_back(make_perceptron(input_dim, hidden_dim, output_dim, rng));
  }
  layer.gate = rng.uniform_matrix(input_dim, experts, 1.0 / std::sqrt(static_cast<double>(input_dim)));
  layer.top_k = top_k;
  layer.lambda = lambda;
  layer.validate();
  return layer;
}

namespace {

RoutingStats stats_from_probabilities(const Matrix& probs, std::size_t k) {
  const std::size_t n = probs.rows();
  const std::size_t e = probs.cols();
  RoutingStats stats;
  stats.probability.assign(e, 0.0);
  stats.load.assign(e, 0.0);
  stats.selections.resize(n);
  if (n == 0) {
    std::fill(stats.probability.begin(), stats.probability.end(), 1.0 / static_cast<double>(e));
    std::fill(stats.load.begin(), stats.load.end(), 1.0 / static_cast<double>(e));
    return stats;
  }
  std::vector<std::size_t> order(e);
  std::vector<std::size_t> counts(e, 0);
  for (std::size_t t = 0; t < n; ++t) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs(t, a) > probs(t, b); });
    auto& sel = stats.selections[t];
    sel.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(sel.begin(), sel.end());
    for (std::size_t idx : sel) ++counts[idx];
    for (std::size_t j = 0; j < e; ++j) stats.probability[j] += probs(t, j);
  }
  for (std::size_t j = 0; j < e; ++j) {
    stats.probability[j] /= static_cast<double>(n);
    stats.load[j] = static_cast<double>(counts[j]) / static_cast<double>(n * k);
  }
  return stats;
}

double population_variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / n;
}

// Selected probabilities divided by their per-token sum; zeros elsewhere.
ad::Var renormalized_weights(const ad::Var& probs,
                             const std::vector<std::vector<std::size_t>>& selections) {
  const Matrix& p = probs.value();
  Matrix w(p.rows(), p.cols());
  std::vector<double> totals(p.rows(), 0.0);
  for (std::size_t t = 0; t < p.rows(); ++t) {
    for (std::size_t e : selections[t]) totals[t] += p(t, e);
    for (std::size_t e : selections[t]) w(t, e) = p(t, e) / totals[t];
  }
  ad::Tape& tape = *probs.tape();
  const std::size_t ip = probs.id();
  return tape.record(std::move(w), tape.requires_grad(probs),
                     [ip, selections, totals](ad::Tape& tp, const Matrix& g) {
                       const Matrix& pv = tp.value(ip);
                       Matrix d(pv.rows(), pv.cols());
                       for (std::size_t t = 0; t < pv.rows(); ++t) {
                         const double s = totals[t];
                         double weighted = 0.0;
                         for (std::size_t e : selections[t]) weighted += g(t, e) * pv(t, e);
                         for (std::size_t j : selections[t]) {
                           d(t, j) = g(t, j) / s - weighted / (s * s);
                         }
                       }
                       tp.accumulate(ip, d);
                     });
}

}  // namespace

MoeTrace moe(ad::Tape& tape, const MoeLayer& layer, const ad::Var& tokens) {
  layer.validate();
  if (tokens.cols() != layer.input_dim()) {
    throw DimensionError("moe: tokens " + tokens.value().shape_string() + " for gate input " +
                         std::to_string(layer.input_dim()));
  }
  const std::size_t n = tokens.rows();
  if (n == 0) {
    ad::Var empty = tape.constant(Matrix(0, layer.output_dim()));
    return {empty, tape.constant(Matrix(0, layer.expert_count())),
            stats_from_probabilities(Matrix(0, layer.expert_count()), layer.top_k)};
  }
  ad::Var probs = ad::softmax_rows(ad::matmul(tokens, tape.param(layer.gate)));
  RoutingStats stats = stats_from_probabilities(probs.value(), layer.top_k);
  ad::Var weights = renormalized_weights(probs, stats.selections);

  ad::Var output;
  for (std::size_t e = 0; e < layer.expert_count(); ++e) {
    std::vector<std::size_t> rows;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& sel = stats.selections[t];
      if (std::binary_search(sel.begin(), sel.end(), e)) rows.push_back(t);
    }
    if (rows.empty()) continue;
    ad::Var y = perceptron(tape, layer.experts[e], ad::gather_rows(tokens, rows));
    ad::Var w = ad::gather_rows(ad::slice_cols(weights, e, e + 1), rows);
    ad::Var part = ad::scatter_rows(ad::scale_rows(y, w), rows, n);
    output = output.valid() ? ad::add(output, part) : part;
  }
  return {output, probs, std::move(stats)};
}

ad::Var balance_loss(ad::Tape& tape, const MoeTrace& trace, double lambda) {
  const double load_var = population_variance(trace.stats.load);
  if (trace.probabilities.rows() == 0) return tape.constant(Matrix(1, 1, lambda * (0.0 + load_var)));
  ad::Var prob_var = ad::variance(ad::mean_rows(trace.probabilities));
  return ad::scale(ad::add(prob_var, tape.constant(Matrix(1, 1, load_var))), lambda);
}

RoutingStats route(const MoeLayer& layer, const Matrix& tokens) {
  layer.validate();
  if (tokens.cols() != layer.input_dim()) {
    throw DimensionError("route: tokens " + tokens.shape_string() + " for gate input " +
                         std::to_string(layer.input_dim()));
  }
  return stats_from_probabilities(softmax_rows(matmul(tokens, layer.gate)), layer.top_k);
}

std::pair<Matrix, RoutingStats> moe_forward(const MoeLayer& layer, const Matrix& tokens) {
  ad::Tape tape;
  MoeTrace trace = moe(tape, layer, tape.constant(tokens));
  return {trace.output.value(), std::move(trace.stats)};
}

double balance_loss(const RoutingStats& stats, double lambda) {
  return lambda * (population_variance(stats.probability) + population_variance(stats.load));
}

}  // namespace v2x
