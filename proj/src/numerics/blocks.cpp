#include "v2x/numerics/blocks.hpp"

#include <cmath>

namespace v2x {

void PerceptronBlock::validate() const {
  if (b1.rows() != 1 || b1.cols() != w1.cols() || w2.rows() != w1.cols() || b2.rows() != 1 ||
      b2.cols() != w2.cols()) {
    throw DimensionError("perceptron block shapes inconsistent: w1 " + w1.shape_string() +
                         ", b1 " + b1.shape_string() + ", w2 " + w2.shape_string() + ", b2 " +
                         b2.shape_string());
  }
}

PerceptronBlock make_perceptron(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  PerceptronBlock b;
  b.w1 = rng.uniform_matrix(in, hidden, std::sqrt(6.0 / static_cast<double>(in + hidden)));
  b.b1 = rng.uniform_matrix(1, hidden, 0.1);
  b.w2 = rng.uniform_matrix(hidden, out, std::sqrt(6.0 / static_cast<double>(hidden + out)));
  b.b2 = rng.uniform_matrix(1, out, 0.1);
  return b;
}

PerceptronBlock zero_perceptron(std::size_t in, std::size_t hidden, std::size_t out) {
  return PerceptronBlock{Matrix(in, hidden), Matrix(1, hidden), Matrix(hidden, out),
                         Matrix(1, out)};
}

ad::Var perceptron(ad::Tape& tape, const PerceptronBlock& block, const ad::Var& x) {
  block.validate();
  if (x.cols() != block.input_dim()) {
    throw DimensionError("perceptron input " + x.value().shape_string() + " for input dim " +
                         std::to_string(block.input_dim()));
  }
  ad::Var h = ad::relu(ad::add_row(ad::matmul(x, tape.param(block.w1)), tape.param(block.b1)));
  return ad::add_row(ad::matmul(h, tape.param(block.w2)), tape.param(block.b2));
}

Matrix perceptron_forward(const PerceptronBlock& block, const Matrix& x) {
  ad::Tape tape;
  return perceptron(tape, block, tape.constant(x)).value();
}

void LinearBlock::validate() const {
  if (b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("linear block shapes inconsistent: w " + w.shape_string() + ", b " +
                         b.shape_string());
  }
}

LinearBlock make_linear(std::size_t in, std::size_t out, Rng& rng) {
  LinearBlock l;
  l.w = rng.uniform_matrix(in, out, std::sqrt(6.0 / static_cast<double>(in + out)));
  l.b = rng.uniform_matrix(1, out, 0.1);
  return l;
}

LinearBlock zero_linear(std::size_t in, std::size_t out) {
  return LinearBlock{Matrix(in, out), Matrix(1, out)};
}

ad::Var linear(ad::Tape& tape, const LinearBlock& block, const ad::Var& x) {
  block.validate();
  if (x.cols() != block.input_dim()) {
    throw DimensionError("linear input " + x.value().shape_string() + " for input dim " +
                         std::to_string(block.input_dim()));
  }
  return ad::add_row(ad::matmul(x, tape.param(block.w)), tape.param(block.b));
}

void AttentionBlock::validate() const {
  const std::size_t d = model_dim();
  if (heads() == 0 || d % heads() != 0 || output.cols() != d || key.size() != heads() ||
      value.size() != heads()) {
    throw DimensionError("attention block: model dim " + std::to_string(d) +
                         " not divisible into " + std::to_string(heads()) + " heads");
  }
  for (std::size_t h = 0; h < heads(); ++h) {
    for (const Matrix* m : {&query[h], &key[h], &value[h]}) {
      if (m->rows() != d || m->cols() != head_dim()) {
        throw DimensionError("attention projection shape " + m->shape_string());
      }
    }
  }
}

AttentionBlock make_attention(std::size_t model_dim, std::size_t heads, Rng& rng) {
  if (heads == 0 || model_dim % heads != 0) {
    throw DimensionError("model dim " + std::to_string(model_dim) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  const std::size_t hd = model_dim / heads;
  const double bound = std::sqrt(6.0 / static_cast<double>(model_dim + hd));
  AttentionBlock b;
  for (std::size_t h = 0; h < heads; ++h) {
    b.query.push_back(rng.uniform_matrix(model_dim, hd, bound));
    b.key.push_back(rng.uniform_matrix(model_dim, hd, bound));
    b.value.push_back(rng.uniform_matrix(model_dim, hd, bound));
  }
  b.output = rng.uniform_matrix(model_dim, model_dim, std::sqrt(3.0 / model_dim));
  return b;
}

ad::Var attention(ad::Tape& tape, const AttentionBlock& block, const ad::Var& queries,
                  const ad::Var& context) {
  block.validate();
  const std::size_t d = block.model_dim();
  if (queries.cols() != d || context.cols() != d) {
    throw DimensionError("attention inputs " + queries.value().shape_string() + " / " +
                         context.value().shape_string() + " for model dim " +
                         std::to_string(d));
  }
  if (queries.rows() == 0) return tape.constant(Matrix(0, d));
  const double scale = 1.0 / std::sqrt(static_cast<double>(block.head_dim()));
  std::vector<ad::Var> heads;
  heads.reserve(block.heads());
  for (std::size_t h = 0; h < block.heads(); ++h) {
    ad::Var q = ad::matmul(queries, tape.param(block.query[h]));
    ad::Var k = ad::matmul(context, tape.param(block.key[h]));
    ad::Var v = ad::matmul(context, tape.param(block.value[h]));
    heads.push_back(ad::attend(q, k, v, scale));
  }
  ad::Var joined = heads.size() == 1 ? heads.front() : ad::concat_cols(heads);
  return ad::matmul(joined, tape.param(block.output));
}

ad::Var self_attention(ad::Tape& tape, const AttentionBlock& block, const ad::Var& tokens) {
  return attention(tape, block, tokens, tokens);
}

Matrix mhsa(const AttentionBlock& block, const Matrix& tokens) {
  ad::Tape tape;
  ad::Var x = tape.constant(tokens);
  return self_attention(tape, block, x).value();
}

Matrix mhca(const AttentionBlock& block, const Matrix& queries, const Matrix& context) {
  ad::Tape tape;
  return attention(tape, block, tape.constant(queries), tape.constant(context)).value();
}

}  // namespace v2x
