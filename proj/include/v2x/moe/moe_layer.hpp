#pragma once

#include <string>
#include <utility>
#include <vector>

#include "v2x/numerics/blocks.hpp"

namespace v2x {

// Sparse mixture of experts: a linear softmax gate picks the top-k experts per
// token and their renormalised probabilities weight the expert outputs.
struct MoeLayer {
  std::vector<PerceptronBlock> experts;
  Matrix gate;  // input_dim x E, no bias
  std::size_t top_k = 2;
  double lambda = 0.03;

  std::size_t expert_count() const { return experts.size(); }
  std::size_t input_dim() const { return gate.rows(); }
  std::size_t output_dim() const { return experts.empty() ? 0 : experts.front().output_dim(); }
  void validate() const;
};

MoeLayer make_moe(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                  std::size_t experts, std::size_t top_k, double lambda, Rng& rng);

struct RoutingStats {
  std::vector<double> probability;  // p: mean gate probability per expert
  std::vector<double> load;         // l: routed selections / (tokens * k)
  std::vector<std::vector<std::size_t>> selections;  // per token, ascending expert index

  friend bool operator==(const RoutingStats&, const RoutingStats&) = default;
};

RoutingStats route(const MoeLayer& layer, const Matrix& tokens);
std::pair<Matrix, RoutingStats> moe_forward(const MoeLayer& layer, const Matrix& tokens);
// lambda * (Var(p) + Var(l)) with population variance over experts.
double balance_loss(const RoutingStats& stats, double lambda);

struct MoeTrace {
  ad::Var output;
  ad::Var probabilities;  // tokens x E gate softmax
  RoutingStats stats;
};

MoeTrace moe(ad::Tape& tape, const MoeLayer& layer, const ad::Var& tokens);
ad::Var balance_loss(ad::Tape& tape, const MoeTrace& trace, double lambda);

template <class Self, class F>
  requires ParameterOwner<Self, MoeLayer>
void visit_parameters(Self& layer, const std::string& prefix, F&& fn) {
  fn(prefix + ".gate", layer.gate);
  for (std::size_t e = 0; e < layer.experts.size(); ++e) {
    visit_parameters(layer.experts[e], prefix + ".expert" + std::to_string(e), fn);
  }
}

}  // namespace v2x
