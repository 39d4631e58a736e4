#pragma once

#include <concepts>
#include <string>
#include <type_traits>
#include <vector>

#include "v2x/numerics/matrix.hpp"
#include "v2x/numerics/random.hpp"
#include "v2x/numerics/tape.hpp"

namespace v2x {

template <class Self, class T>
concept ParameterOwner = std::same_as<std::remove_const_t<Self>, T>;

// Two-layer feed-forward map: relu(x W1 + b1) W2 + b2.
struct PerceptronBlock {
  Matrix w1;  // in x hidden
  Matrix b1;  // 1 x hidden
  Matrix w2;  // hidden x out
  Matrix b2;  // 1 x out

  std::size_t input_dim() const { return w1.rows(); }
  std::size_t hidden_dim() const { return w1.cols(); }
  std::size_t output_dim() const { return w2.cols(); }
  void validate() const;
};

PerceptronBlock make_perceptron(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
PerceptronBlock zero_perceptron(std::size_t in, std::size_t hidden, std::size_t out);

ad::Var perceptron(ad::Tape& tape, const PerceptronBlock& block, const ad::Var& x);
Matrix perceptron_forward(const PerceptronBlock& block, const Matrix& x);

template <class Self, class F>
  requires ParameterOwner<Self, PerceptronBlock>
void visit_parameters(Self& block, const std::string& prefix, F&& fn) {
  fn(prefix + ".w1", block.w1);
  fn(prefix + ".b1", block.b1);
  fn(prefix + ".w2", block.w2);
  fn(prefix + ".b2", block.b2);
}

// Affine map x W + b.
struct LinearBlock {
  Matrix w;  // in x out
  Matrix b;  // 1 x out

  std::size_t input_dim() const { return w.rows(); }
  std::size_t output_dim() const { return w.cols(); }
  void validate() const;
};

LinearBlock make_linear(std::size_t in, std::size_t out, Rng& rng);
LinearBlock zero_linear(std::size_t in, std::size_t out);
ad::Var linear(ad::Tape& tape, const LinearBlock& block, const ad::Var& x);

template <class Self, class F>
  requires ParameterOwner<Self, LinearBlock>
void visit_parameters(Self& block, const std::string& prefix, F&& fn) {
  fn(prefix + ".w", block.w);
  fn(prefix + ".b", block.b);
}

// Multi-head attention. Head h projects with query/key/value matrices of shape
// model_dim x head_dim; concatenated heads pass through the output projection.
struct AttentionBlock {
  std::vector<Matrix> query;
  std::vector<Matrix> key;
  std::vector<Matrix> value;
  Matrix output;  // model_dim x model_dim

  std::size_t heads() const { return query.size(); }
  std::size_t model_dim() const { return output.rows(); }
  std::size_t head_dim() const { return heads() == 0 ? 0 : model_dim() / heads(); }
  void validate() const;
};

AttentionBlock make_attention(std::size_t model_dim, std::size_t heads, Rng& rng);

// queries attend over context rows; rows of queries are processed independently.
ad::Var attention(ad::Tape& tape, const AttentionBlock& block, const ad::Var& queries,
                  const ad::Var& context);
ad::Var self_attention(ad::Tape& tape, const AttentionBlock& block, const ad::Var& tokens);

Matrix mhsa(const AttentionBlock& block, const Matrix& tokens);
Matrix mhca(const AttentionBlock& block, const Matrix& queries, const Matrix& context);

template <class Self, class F>
  requires ParameterOwner<Self, AttentionBlock>
void visit_parameters(Self& block, const std::string& prefix, F&& fn) {
  for (std::size_t h = 0; h < block.heads(); ++h) {
    const std::string head = prefix + ".head" + std::to_string(h);
    fn(head + ".q", block.query[h]);
    fn(head + ".k", block.key[h]);
    fn(head + ".v", block.value[h]);
  }
  fn(prefix + ".out", block.output);
}

}  // namespace v2x
