#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "v2x/numerics/matrix.hpp"

namespace v2x::ad {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records an operation graph over matrices and runs reverse-mode accumulation.
//
// Parameters are registered by address. With tracking disabled they enter the
// graph as constants and no backward closures are kept, so the same model code
// serves plain evaluation and training.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  explicit Tape(bool track_parameters = false) : track_(track_parameters) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool tracking() const { return track_; }

  Var constant(Matrix value);
  Var param(const Matrix& parameter);
  Var record(Matrix value, bool requires_grad, Backward backward);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(const Var& v) const { return requires_grad(v.id()); }

  // Adds delta into the gradient buffer of node id (no-op for constants).
  void accumulate(std::size_t id, const Matrix& delta);

  // Seeds d(loss)/d(loss) = 1 for a 1x1 loss and propagates to every node.
  void backward(const Var& loss);

  // Gradient of a node after backward; zeros when nothing flowed into it.
  Matrix grad(const Var& v) const;
  // Gradient of a registered parameter; zeros when the parameter was unused.
  Matrix param_grad(const Matrix& parameter) const;
  std::size_t parameter_count() const { return params_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };

  bool track_;
  std::deque<Node> nodes_;
  std::unordered_map<const Matrix*, std::size_t> params_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
// Adds a 1xC row to every row of a.
Var add_row(const Var& a, const Var& row);
// Multiplies row i of a by weights(i, 0).
Var scale_rows(const Var& a, const Var& weights);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var softmax_rows(const Var& a);

// softmax(q k^T * scale) v. Reductions over the key axis are summed in
// canonical order, so permuting key/value rows together leaves each output
// row bitwise unchanged.
Var attend(const Var& q, const Var& k, const Var& v, double scale);

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
Var transpose(const Var& a);
// Same data reinterpreted as rows x cols (row-major order preserved).
Var reshape(const Var& a, std::size_t rows, std::size_t cols);
Var gather_rows(const Var& a, const std::vector<std::size_t>& rows);
// Places row i of a at row index[i] of a zero matrix with total_rows rows.
Var scatter_rows(const Var& a, const std::vector<std::size_t>& index, std::size_t total_rows);
// out(i, 0) = a(i, column[i]).
Var pick(const Var& a, const std::vector<std::size_t>& column);

Var sum(const Var& a);
Var mean(const Var& a);
// 1xC row of column means.
Var mean_rows(const Var& a);
// Population variance over all entries, 1x1.
Var variance(const Var& a);
// Mean binary cross-entropy of sigmoid(logits) against targets in [0,1], 1x1.
Var bce_with_logits(const Var& logits, const Matrix& targets);

}  // namespace v2x::ad
