#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rlgaf/param_store.hpp"

namespace rlgaf {

class Tape;

// Handle to a tape node. Only meaningful together with the tape that issued it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode gradient accumulation over a fixed operation vocabulary: the
// graph is recorded eagerly (node creation order is a topological order), and
// backward() sweeps it once in reverse. Values and gradients are dense
// column-major doubles throughout.
//
// Leaves created via param() are tied to a name; grads_for() collects their
// accumulated gradients into a GradStore congruent with a given ParamStore,
// with zeros for parameters the forward pass never touched.
class Tape {
 public:
  Var constant(Matrix value);
  Var scalar(double value);
  // Differentiable leaf. `name` keys the gradient export.
  Var param(const std::string& name, const Matrix& value);

  // --- fixed op vocabulary ------------------------------------------------
  Var matmul(Var a, Var b);   // A * B
  Var tmatmul(Var a, Var b);  // A^T * B
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);  // elementwise product, equal shapes
  Var scale(Var a, double c);
  Var embedding_row(Var table, int row);  // row of a V x d table, as d x 1
  Var tanh(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var softmax(Var logits);      // n x 1 -> n x 1
  Var log_softmax(Var logits);  // n x 1 -> n x 1
  Var sum(Var a);               // 1 x 1
  Var mean(Var a);              // 1 x 1
  Var pick(Var v, int i);       // element i of an n x 1 vector, as 1 x 1
  Var concat_rows(const std::vector<Var>& parts);  // stack column vectors
  Var concat_cols(const std::vector<Var>& parts);  // columns side by side
  Var bce_with_logits(Var score, int label);       // score is 1 x 1
  Var vmin(Var a, Var b);                          // elementwise min
  Var clamp(Var a, double lo, double hi);
  // Forward: exact one-hot at the argmax (lowest index on ties).
  // Backward: identity (straight-through).
  Var hard_onehot(Var weights);

  const Matrix& value(Var v) const;
  double scalar_value(Var v) const;

  // Gradient of a scalar node with respect to everything on the tape.
  // Throws StructuralError if `terminal` is not 1 x 1.
  void backward(Var terminal);

  // Gradient of node v after backward(); zero matrix if backward never
  // reached it.
  Matrix grad(Var v) const;

  // Export accumulated leaf gradients into a store congruent with `params`.
  GradStore grads_for(const ParamStore& params) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // lazily sized on first touch during backward
    std::function<void(Tape&, int)> backprop;  // may be empty (leaf/constant)
    std::string param_name;                    // non-empty only for param leaves
  };

  int push(Matrix value, std::function<void(Tape&, int)> backprop);
  Node& node(Var v);
  const Node& node(Var v) const;
  Matrix& grad_slot(int id);  // zero-initializes on first access

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace rlgaf
