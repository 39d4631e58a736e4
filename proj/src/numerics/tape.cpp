#include "v2x/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace v2x::ad {

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(const Matrix& parameter) {
  if (!track_) return constant(parameter);
  if (auto it = params_.find(&parameter); it != params_.end()) return Var(this, it->second);
  nodes_.push_back(Node{parameter, Matrix(), true, nullptr});
  params_.emplace(&parameter, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, bool requires_grad, Backward backward) {
  if (!requires_grad) backward = nullptr;
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(std::size_t id, const Matrix& delta) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return;
  if (node.grad.rows() != node.value.rows() || node.grad.cols() != node.value.cols() ||
      node.grad.size() != node.value.size()) {
    node.grad = Matrix(node.value.rows(), node.value.cols());
  }
  if (delta.rows() != node.value.rows() || delta.cols() != node.value.cols()) {
    throw DimensionError("gradient shape " + delta.shape_string() + " for value " +
                         node.value.shape_string());
  }
  for (std::size_t i = 0; i < delta.size(); ++i) node.grad[i] += delta[i];
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw std::logic_error("backward: loss recorded on another tape");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw DimensionError("backward expects a 1x1 loss, got " + loss.value().shape_string());
  }
  for (auto& node : nodes_) node.grad = Matrix();
  accumulate(loss.id(), Matrix(1, 1, 1.0));
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    node.backward(*this, node.grad);
  }
}

Matrix Tape::grad(const Var& v) const {
  const Node& node = nodes_[v.id()];
  if (node.grad.empty() && !node.value.empty()) return Matrix(node.value.rows(), node.value.cols());
  return node.grad;
}

Matrix Tape::param_grad(const Matrix& parameter) const {
  auto it = params_.find(&parameter);
  if (it == params_.end()) return Matrix(parameter.rows(), parameter.cols());
  return grad(Var(const_cast<Tape*>(this), it->second));
}

namespace {

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw std::logic_error("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw std::logic_error("operands recorded on different tapes");
  return tape_of(a);
}

bool needs(const Var& a) { return a.tape()->requires_grad(a); }

Matrix map_values(const Matrix& m, double (*f)(double)) {
  Matrix out = m;
  for (auto& v : out.data()) v = f(v);
  return out;
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(v2x::matmul(a.value(), b.value()), needs(a) || needs(b),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    if (tp.requires_grad(ia))
                      tp.accumulate(ia, v2x::matmul(g, v2x::transpose(tp.value(ib))));
                    if (tp.requires_grad(ib))
                      tp.accumulate(ib, v2x::matmul(v2x::transpose(tp.value(ia)), g));
                  });
}

Var add(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(v2x::add(a.value(), b.value()), needs(a) || needs(b),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    tp.accumulate(ia, g);
                    tp.accumulate(ib, g);
                  });
}

Var sub(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(v2x::subtract(a.value(), b.value()), needs(a) || needs(b),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    tp.accumulate(ia, g);
                    if (tp.requires_grad(ib)) tp.accumulate(ib, v2x::scale(g, -1.0));
                  });
}

Var mul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw DimensionError("mul: " + av.shape_string() + " vs " + bv.shape_string());
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(std::move(out), needs(a) || needs(b), [ia, ib](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(ia)) {
      Matrix d = g;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= tp.value(ib)[i];
      tp.accumulate(ia, d);
    }
    if (tp.requires_grad(ib)) {
      Matrix d = g;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= tp.value(ia)[i];
      tp.accumulate(ib, d);
    }
  });
}

Var scale(const Var& a, double s) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  return t.record(v2x::scale(a.value(), s), needs(a),
                  [ia, s](Tape& tp, const Matrix& g) { tp.accumulate(ia, v2x::scale(g, s)); });
}

Var add_row(const Var& a, const Var& row) {
  Tape& t = tape_of(a, row);
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw DimensionError("add_row: " + av.shape_string() + " + " + rv.shape_string());
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv(0, j);
  const std::size_t ia = a.id();
  const std::size_t ir = row.id();
  return t.record(std::move(out), needs(a) || needs(row), [ia, ir](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g);
    if (tp.requires_grad(ir)) {
      Matrix d(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) d(0, j) += g(i, j);
      tp.accumulate(ir, d);
    }
  });
}

Var scale_rows(const Var& a, const Var& weights) {
  Tape& t = tape_of(a, weights);
  const Matrix& av = a.value();
  const Matrix& wv = weights.value();
  if (wv.rows() != av.rows() || wv.cols() != 1) {
    throw DimensionError("scale_rows: " + av.shape_string() + " by " + wv.shape_string());
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= wv(i, 0);
  const std::size_t ia = a.id();
  const std::size_t iw = weights.id();
  return t.record(std::move(out), needs(a) || needs(weights),
                  [ia, iw](Tape& tp, const Matrix& g) {
                    const Matrix& av2 = tp.value(ia);
                    const Matrix& wv2 = tp.value(iw);
                    if (tp.requires_grad(ia)) {
                      Matrix d = g;
                      for (std::size_t i = 0; i < d.rows(); ++i)
                        for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) *= wv2(i, 0);
                      tp.accumulate(ia, d);
                    }
                    if (tp.requires_grad(iw)) {
                      Matrix d(wv2.rows(), 1);
                      for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) d(i, 0) += g(i, j) * av2(i, j);
                      tp.accumulate(iw, d);
                    }
                  });
}

Var relu(const Var& a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  Matrix out = map_values(a.value(), [](double x) { return x > 0.0 ? x : 0.0; });
  return t.record(std::move(out), needs(a), [ia](Tape& tp, const Matrix& g) {
    Matrix d = g;
    const Matrix& x = tp.value(ia);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (!(x[i] > 0.0)) d[i] = 0.0;
    tp.accumulate(ia, d);
  });
}

Var sigmoid(const Var& a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  Matrix out = map_values(a.value(), sigmoid_scalar);
  return t.record(out, needs(a), [ia, out](Tape& tp, const Matrix& g) {
    Matrix d = g;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= out[i] * (1.0 - out[i]);
    tp.accumulate(ia, d);
  });
}

Var tanh(const Var& a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  Matrix out = map_values(a.value(), [](double x) { return std::tanh(x); });
  return t.record(out, needs(a), [ia, out](Tape& tp, const Matrix& g) {
    Matrix d = g;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - out[i] * out[i];
    tp.accumulate(ia, d);
  });
}

namespace {

// Backward of row softmax given its output y and upstream gradient g.
Matrix softmax_backward(const Matrix& y, const Matrix& g) {
  Matrix d(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) d(i, j) = y(i, j) * (g(i, j) - dot);
  }
  return d;
}

}  // namespace

Var softmax_rows(const Var& a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  Matrix out = v2x::softmax_rows(a.value());
  return t.record(out, needs(a), [ia, out](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, softmax_backward(out, g));
  });
}

Var attend(const Var& q, const Var& k, const Var& v, double scale) {
  Tape& t = tape_of(q, k);
  tape_of(k, v);
  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  const Matrix& vv = v.value();
  if (qv.cols() != kv.cols() || kv.rows() != vv.rows()) {
    throw DimensionError("attend: q " + qv.shape_string() + ", k " + kv.shape_string() +
                         ", v " + vv.shape_string());
  }
  if (kv.rows() == 0) throw DimensionError("attend: empty key set");
  const std::size_t nq = qv.rows();
  const std::size_t nk = kv.rows();
  const std::size_t dv = vv.cols();

  Matrix weights(nq, nk);
  std::vector<double> terms(nk);
  for (std::size_t i = 0; i < nq; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nk; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < qv.cols(); ++c) acc += qv(i, c) * kv(j, c);
      weights(i, j) = acc * scale;
      mx = std::max(mx, weights(i, j));
    }
    for (std::size_t j = 0; j < nk; ++j) {
      weights(i, j) = std::exp(weights(i, j) - mx);
      terms[j] = weights(i, j);
    }
    const double total = canonical_sum(terms);
    for (std::size_t j = 0; j < nk; ++j) weights(i, j) /= total;
  }
  Matrix out(nq, dv);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t c = 0; c < dv; ++c) {
      for (std::size_t j = 0; j < nk; ++j) terms[j] = weights(i, j) * vv(j, c);
      out(i, c) = canonical_sum(terms);
    }
  }

  const std::size_t iq = q.id();
  const std::size_t ik = k.id();
  const std::size_t iv = v.id();
  return t.record(std::move(out), needs(q) || needs(k) || needs(v),
                  [iq, ik, iv, weights, scale](Tape& tp, const Matrix& g) {
                    const Matrix& qv2 = tp.value(iq);
                    const Matrix& kv2 = tp.value(ik);
                    const Matrix& vv2 = tp.value(iv);
                    if (tp.requires_grad(iv)) tp.accumulate(iv, v2x::matmul(v2x::transpose(weights), g));
                    if (!tp.requires_grad(iq) && !tp.requires_grad(ik)) return;
                    const Matrix d_weights = v2x::matmul(g, v2x::transpose(vv2));
                    const Matrix d_scores = v2x::scale(softmax_backward(weights, d_weights), scale);
                    if (tp.requires_grad(iq)) tp.accumulate(iq, v2x::matmul(d_scores, kv2));
                    if (tp.requires_grad(ik))
                      tp.accumulate(ik, v2x::matmul(v2x::transpose(d_scores), qv2));
                  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::logic_error("concat_rows: no parts");
  Tape& t = tape_of(parts.front());
  std::size_t cols = parts.front().cols();
  for (const auto& p : parts)
    if (p.rows() > 0) cols = p.cols();
  std::vector<double> data;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (id, rows)
  bool grad = false;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    tape_of(parts.front(), p);
    if (p.rows() > 0 && p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " + p.value().shape_string());
    }
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    spans.emplace_back(p.id(), p.rows());
    rows += p.rows();
    grad = grad || needs(p);
  }
  return t.record(Matrix(rows, cols, std::move(data)), grad,
                  [spans](Tape& tp, const Matrix& g) {
                    std::size_t offset = 0;
                    for (const auto& [id, n] : spans) {
                      if (n > 0 && tp.requires_grad(id)) {
                        tp.accumulate(id, v2x::slice_rows(g, offset, offset + n));
                      }
                      offset += n;
                    }
                  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::logic_error("concat_cols: no parts");
  Tape& t = tape_of(parts.front());
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  bool grad = false;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (id, cols)
  for (const auto& p : parts) {
    tape_of(parts.front(), p);
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + p.value().shape_string());
    }
    spans.emplace_back(p.id(), p.cols());
    cols += p.cols();
    grad = grad || needs(p);
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) out(i, offset + j) = p.value()(i, j);
    offset += p.cols();
  }
  return t.record(std::move(out), grad, [spans](Tape& tp, const Matrix& g) {
    std::size_t off = 0;
    for (const auto& [id, n] : spans) {
      if (tp.requires_grad(id)) {
        Matrix d(g.rows(), n);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < n; ++j) d(i, j) = g(i, off + j);
        tp.accumulate(id, d);
      }
      off += n;
    }
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  const std::size_t total = a.rows();
  return t.record(v2x::slice_rows(a.value(), begin, end), needs(a),
                  [ia, begin, total](Tape& tp, const Matrix& g) {
                    Matrix d(total, g.cols());
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < g.cols(); ++j) d(begin + i, j) = g(i, j);
                    tp.accumulate(ia, d);
                  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (begin > end || end > av.cols()) throw DimensionError("slice_cols out of range");
  Matrix out(av.rows(), end - begin);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = av(i, j);
  const std::size_t ia = a.id();
  const std::size_t total = av.cols();
  return t.record(std::move(out), needs(a), [ia, begin, total](Tape& tp, const Matrix& g) {
    Matrix d(g.rows(), total);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) d(i, begin + j) = g(i, j);
    tp.accumulate(ia, d);
  });
}

Var transpose(const Var& a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  return t.record(v2x::transpose(a.value()), needs(a), [ia](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, v2x::transpose(g));
  });
}

Var reshape(const Var& a, std::size_t rows, std::size_t cols) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (rows * cols != av.size()) {
    throw DimensionError("reshape " + av.shape_string() + " to " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  const std::size_t ia = a.id();
  const std::size_t r0 = av.rows();
  const std::size_t c0 = av.cols();
  return t.record(Matrix(rows, cols, std::vector<double>(av.data().begin(), av.data().end())),
                  needs(a), [ia, r0, c0](Tape& tp, const Matrix& g) {
                    tp.accumulate(ia, Matrix(r0, c0, std::vector<double>(g.data().begin(),
                                                                         g.data().end())));
                  });
}

Var gather_rows(const Var& a, const std::vector<std::size_t>& rows) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix out(rows.size(), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= av.rows()) throw DimensionError("gather_rows: index out of range");
    std::copy(av.row(rows[i]).begin(), av.row(rows[i]).end(), out.row(i).begin());
  }
  const std::size_t ia = a.id();
  const std::size_t total = av.rows();
  return t.record(std::move(out), needs(a), [ia, rows, total](Tape& tp, const Matrix& g) {
    Matrix d(total, g.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) d(rows[i], j) += g(i, j);
    tp.accumulate(ia, d);
  });
}

Var scatter_rows(const Var& a, const std::vector<std::size_t>& index, std::size_t total_rows) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (index.size() != av.rows()) throw DimensionError("scatter_rows: index length mismatch");
  Matrix out(total_rows, av.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= total_rows) throw DimensionError("scatter_rows: index out of range");
    for (std::size_t j = 0; j < av.cols(); ++j) out(index[i], j) += av(i, j);
  }
  const std::size_t ia = a.id();
  return t.record(std::move(out), needs(a), [ia, index](Tape& tp, const Matrix& g) {
    Matrix d(index.size(), g.cols());
    for (std::size_t i = 0; i < index.size(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) d(i, j) = g(index[i], j);
    tp.accumulate(ia, d);
  });
}

Var pick(const Var& a, const std::vector<std::size_t>& column) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (column.size() != av.rows()) throw DimensionError("pick: one column per row required");
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    if (column[i] >= av.cols()) throw DimensionError("pick: column out of range");
    out(i, 0) = av(i, column[i]);
  }
  const std::size_t ia = a.id();
  const std::size_t cols = av.cols();
  return t.record(std::move(out), needs(a), [ia, column, cols](Tape& tp, const Matrix& g) {
    Matrix d(column.size(), cols);
    for (std::size_t i = 0; i < column.size(); ++i) d(i, column[i]) = g(i, 0);
    tp.accumulate(ia, d);
  });
}

Var sum(const Var& a) {
  Tape& t = tape_of(a);
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  const std::size_t ia = a.id();
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  return t.record(Matrix(1, 1, acc), needs(a), [ia, r, c](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, Matrix(r, c, g(0, 0)));
  });
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw DimensionError("mean of an empty matrix");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mean_rows(const Var& a) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (av.rows() == 0) throw DimensionError("mean_rows of an empty matrix");
  const double inv = 1.0 / static_cast<double>(av.rows());
  Matrix out(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
  for (auto& v : out.data()) v *= inv;
  const std::size_t ia = a.id();
  const std::size_t rows = av.rows();
  return t.record(std::move(out), needs(a), [ia, rows, inv](Tape& tp, const Matrix& g) {
    Matrix d(rows, g.cols());
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) d(i, j) = g(0, j) * inv;
    tp.accumulate(ia, d);
  });
}

Var variance(const Var& a) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (av.size() == 0) throw DimensionError("variance of an empty matrix");
  const double n = static_cast<double>(av.size());
  double m = 0.0;
  for (double v : av.data()) m += v;
  m /= n;
  double acc = 0.0;
  for (double v : av.data()) acc += (v - m) * (v - m);
  const std::size_t ia = a.id();
  return t.record(Matrix(1, 1, acc / n), needs(a), [ia, m, n](Tape& tp, const Matrix& g) {
    Matrix d = tp.value(ia);
    for (auto& v : d.data()) v = g(0, 0) * 2.0 * (v - m) / n;
    tp.accumulate(ia, d);
  });
}

Var bce_with_logits(const Var& logits, const Matrix& targets) {
  Tape& t = tape_of(logits);
  const Matrix& x = logits.value();
  if (x.rows() != targets.rows() || x.cols() != targets.cols()) {
    throw DimensionError("bce_with_logits: " + x.shape_string() + " vs " +
                         targets.shape_string());
  }
  if (x.size() == 0) throw DimensionError("bce_with_logits of an empty matrix");
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    acc += std::max(v, 0.0) - v * targets[i] + std::log1p(std::exp(-std::abs(v)));
  }
  const std::size_t ix = logits.id();
  return t.record(Matrix(1, 1, acc / n), needs(logits),
                  [ix, targets, n](Tape& tp, const Matrix& g) {
                    const Matrix& xv = tp.value(ix);
                    Matrix d(xv.rows(), xv.cols());
                    for (std::size_t i = 0; i < xv.size(); ++i)
                      d[i] = g(0, 0) * (sigmoid_scalar(xv[i]) - targets[i]) / n;
                    tp.accumulate(ix, d);
                  });
}

}  // namespace v2x::ad
