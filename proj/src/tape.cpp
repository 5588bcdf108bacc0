#include "rlgaf/tape.hpp"

#include <cmath>

#include "rlgaf/errors.hpp"
#include "rlgaf/numeric.hpp"

namespace rlgaf {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInputError(std::string(op) + ": shape mismatch");
}

void require_column(const Matrix& a, const char* op) {
  if (a.cols() != 1)
    throw InvalidInputError(std::string(op) + ": expected a column vector");
}

}  // namespace

int Tape::push(Matrix value, std::function<void(Tape&, int)> backprop) {
  if (backward_done_)
    throw StructuralError("Tape: cannot record after backward()");
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(backprop), {}});
  return static_cast<int>(nodes_.size()) - 1;
}

Tape::Node& Tape::node(Var v) {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw StructuralError("Tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw StructuralError("Tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

Matrix& Tape::grad_slot(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Matrix value) { return Var{push(std::move(value), nullptr)}; }

Var Tape::scalar(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Var Tape::param(const std::string& name, const Matrix& value) {
  int id = push(value, nullptr);
  nodes_[static_cast<std::size_t>(id)].param_name = name;
  return Var{id};
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  if (A.cols() != B.rows()) throw InvalidInputError("matmul: inner dim mismatch");
  int ia = a.id, ib = b.id;
  return Var{push(A * B, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix& A = t.nodes_[ia].value;
    const Matrix& B = t.nodes_[ib].value;
    t.grad_slot(ia) += g * B.transpose();
    t.grad_slot(ib) += A.transpose() * g;
  })};
}

Var Tape::tmatmul(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  if (A.rows() != B.rows()) throw InvalidInputError("tmatmul: inner dim mismatch");
  int ia = a.id, ib = b.id;
  return Var{push(A.transpose() * B, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix& A = t.nodes_[ia].value;
    const Matrix& B = t.nodes_[ib].value;
    t.grad_slot(ia) += B * g.transpose();
    t.grad_slot(ib) += A * g;
  })};
}

Var Tape::add(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "add");
  int ia = a.id, ib = b.id;
  return Var{push(A + B, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.nodes_[self].grad;
    t.grad_slot(ia) += g;
    t.grad_slot(ib) += g;
  })};
}

Var Tape::sub(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "sub");
  int ia = a.id, ib = b.id;
  return Var{push(A - B, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.nodes_[self].grad;
    t.grad_slot(ia) += g;
    t.grad_slot(ib) -= g;
  })};
}

Var Tape::cmul(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "cmul");
  int ia = a.id, ib = b.id;
  return Var{push(A.cwiseProduct(B), [ia, ib](Tape& t, int self) {
    const Matrix& g = t.nodes_[self].grad;
    t.grad_slot(ia) += g.cwiseProduct(t.nodes_[ib].value);
    t.grad_slot(ib) += g.cwiseProduct(t.nodes_[ia].value);
  })};
}

Var Tape::scale(Var a, double c) {
  int ia = a.id;
  return Var{push(node(a).value * c, [ia, c](Tape& t, int self) {
    t.grad_slot(ia) += t.nodes_[self].grad * c;
  })};
}

Var Tape::embedding_row(Var table, int row) {
  const Matrix& T = node(table).value;
  if (row < 0 || row >= T.rows())
    throw InvalidInputError("embedding_row: row out of range");
  int it = table.id;
  return Var{push(T.row(row).transpose(), [it, row](Tape& t, int self) {
    t.grad_slot(it).row(row) += t.nodes_[self].grad.transpose();
  })};
}

Var Tape::tanh(Var a) {
  int ia = a.id;
  return Var{push(node(a).value.array().tanh().matrix(), [ia](Tape& t, int self) {
    const Matrix& y = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    t.grad_slot(ia).array() += g.array() * (1.0 - y.array().square());
  })};
}

Var Tape::relu(Var a) {
  int ia = a.id;
  return Var{push(node(a).value.cwiseMax(0.0), [ia](Tape& t, int self) {
    const Matrix& x = t.nodes_[ia].value;
    const Matrix& g = t.nodes_[self].grad;
    t.grad_slot(ia).array() += g.array() * (x.array() > 0.0).cast<double>();
  })};
}

Var Tape::sigmoid(Var a) {
  const Matrix& X = node(a).value;
  Matrix y(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.size(); ++i) y(i) = rlgaf::sigmoid(X(i));
  int ia = a.id;
  return Var{push(std::move(y), [ia](Tape& t, int self) {
    const Matrix& y = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    t.grad_slot(ia).array() += g.array() * y.array() * (1.0 - y.array());
  })};
}

Var Tape::exp(Var a) {
  int ia = a.id;
  return Var{push(node(a).value.array().exp().matrix(), [ia](Tape& t, int self) {
    const Matrix& y = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    t.grad_slot(ia).array() += g.array() * y.array();
  })};
}

Var Tape::softmax(Var logits) {
  require_column(node(logits).value, "softmax");
  Matrix y = rlgaf::softmax(node(logits).value.col(0));
  int ia = logits.id;
  return Var{push(std::move(y), [ia](Tape& t, int self) {
    const Matrix& y = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    const double dot = (g.array() * y.array()).sum();
    t.grad_slot(ia).array() += y.array() * (g.array() - dot);
  })};
}

Var Tape::log_softmax(Var logits) {
  require_column(node(logits).value, "log_softmax");
  Matrix y = rlgaf::log_softmax(node(logits).value.col(0));
  int ia = logits.id;
  return Var{push(std::move(y), [ia](Tape& t, int self) {
    const Matrix& y = t.nodes_[self].value;  // log p
    const Matrix& g = t.nodes_[self].grad;
    const double gsum = g.sum();
    t.grad_slot(ia).array() += g.array() - gsum * y.array().exp();
  })};
}

Var Tape::sum(Var a) {
  int ia = a.id;
  Matrix s(1, 1);
  s(0, 0) = node(a).value.sum();
  return Var{push(std::move(s), [ia](Tape& t, int self) {
    const double g = t.nodes_[self].grad(0, 0);
    t.grad_slot(ia).array() += g;
  })};
}

Var Tape::mean(Var a) {
  const double n = static_cast<double>(node(a).value.size());
  if (n == 0) throw InvalidInputError("mean: empty input");
  int ia = a.id;
  Matrix s(1, 1);
  s(0, 0) = node(a).value.sum() / n;
  return Var{push(std::move(s), [ia, n](Tape& t, int self) {
    const double g = t.nodes_[self].grad(0, 0);
    t.grad_slot(ia).array() += g / n;
  })};
}

Var Tape::pick(Var v, int i) {
  const Matrix& X = node(v).value;
  require_column(X, "pick");
  if (i < 0 || i >= X.rows()) throw InvalidInputError("pick: index out of range");
  int iv = v.id;
  Matrix s(1, 1);
  s(0, 0) = X(i, 0);
  return Var{push(std::move(s), [iv, i](Tape& t, int self) {
    t.grad_slot(iv)(i, 0) += t.nodes_[self].grad(0, 0);
  })};
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidInputError("concat_rows: no parts");
  Eigen::Index rows = 0;
  for (Var p : parts) {
    require_column(node(p).value, "concat_rows");
    rows += node(p).value.rows();
  }
  Matrix out(rows, 1);
  Eigen::Index at = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> sizes;
  for (Var p : parts) {
    const Matrix& v = node(p).value;
    out.block(at, 0, v.rows(), 1) = v;
    at += v.rows();
    ids.push_back(p.id);
    sizes.push_back(v.rows());
  }
  return Var{push(std::move(out), [ids, sizes](Tape& t, int self) {
    const Matrix& g = t.nodes_[self].grad;
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      t.grad_slot(ids[k]) += g.block(at, 0, sizes[k], 1);
      at += sizes[k];
    }
  })};
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidInputError("concat_cols: no parts");
  const Eigen::Index rows = node(parts[0]).value.rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (node(p).value.rows() != rows)
      throw InvalidInputError("concat_cols: row count mismatch");
    cols += node(p).value.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> sizes;
  for (Var p : parts) {
    const Matrix& v = node(p).value;
    out.block(0, at, rows, v.cols()) = v;
    at += v.cols();
    ids.push_back(p.id);
    sizes.push_back(v.cols());
  }
  return Var{push(std::move(out), [ids, sizes, rows](Tape& t, int self) {
    const Matrix& g = t.nodes_[self].grad;
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      t.grad_slot(ids[k]) += g.block(0, at, rows, sizes[k]);
      at += sizes[k];
    }
  })};
}

Var Tape::bce_with_logits(Var score, int label) {
  const Matrix& S = node(score).value;
  if (S.rows() != 1 || S.cols() != 1)
    throw InvalidInputError("bce_with_logits: score must be scalar");
  Matrix out(1, 1);
  out(0, 0) = rlgaf::bce_with_logits(S(0, 0), label);
  int is = score.id;
  return Var{push(std::move(out), [is, label](Tape& t, int self) {
    const double s = t.nodes_[is].value(0, 0);
    const double g = t.nodes_[self].grad(0, 0);
    t.grad_slot(is)(0, 0) += g * (rlgaf::sigmoid(s) - static_cast<double>(label));
  })};
}

Var Tape::vmin(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  require_same_shape(A, B, "vmin");
  int ia = a.id, ib = b.id;
  // ties route the gradient to the first argument
  return Var{push(A.cwiseMin(B), [ia, ib](Tape& t, int self) {
    const Matrix& A = t.nodes_[ia].value;
    const Matrix& B = t.nodes_[ib].value;
    const Matrix& g = t.nodes_[self].grad;
    Eigen::ArrayXXd take_a = (A.array() <= B.array()).cast<double>();
    t.grad_slot(ia).array() += g.array() * take_a;
    t.grad_slot(ib).array() += g.array() * (1.0 - take_a);
  })};
}

Var Tape::clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidInputError("clamp: lo > hi");
  int ia = a.id;
  return Var{push(node(a).value.cwiseMax(lo).cwiseMin(hi), [ia, lo, hi](Tape& t, int self) {
    const Matrix& x = t.nodes_[ia].value;
    const Matrix& g = t.nodes_[self].grad;
    Eigen::ArrayXXd inside =
        ((x.array() > lo) && (x.array() < hi)).cast<double>();
    t.grad_slot(ia).array() += g.array() * inside;
  })};
}

Var Tape::hard_onehot(Var weights) {
  const Matrix& W = node(weights).value;
  require_column(W, "hard_onehot");
  Eigen::Index best = 0;
  W.col(0).maxCoeff(&best);
  Matrix out = Matrix::Zero(W.rows(), 1);
  out(best, 0) = 1.0;
  int iw = weights.id;
  return Var{push(std::move(out), [iw](Tape& t, int self) {
    t.grad_slot(iw) += t.nodes_[self].grad;
  })};
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar_value(Var v) const {
  const Matrix& m = node(v).value;
  if (m.rows() != 1 || m.cols() != 1)
    throw StructuralError("scalar_value: node is not 1x1");
  return m(0, 0);
}

void Tape::backward(Var terminal) {
  const Node& t = node(terminal);
  if (t.value.rows() != 1 || t.value.cols() != 1)
    throw StructuralError("backward: terminal node is not a scalar");
  if (backward_done_) throw StructuralError("backward: tape already swept");
  backward_done_ = true;
  grad_slot(terminal.id)(0, 0) = 1.0;
  for (int i = terminal.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0 || !n.backprop) continue;
    n.backprop(*this, i);
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

GradStore Tape::grads_for(const ParamStore& params) const {
  GradStore out = zeros_like(params);
  for (const Node& n : nodes_) {
    if (n.param_name.empty() || n.grad.size() == 0) continue;
    if (!out.has(n.param_name)) continue;
    out.at(n.param_name) += n.grad;
  }
  return out;
}

}  // namespace rlgaf
