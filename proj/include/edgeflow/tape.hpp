#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgeflow/tensor.hpp"

namespace edgeflow {

// A named model weight. Gradients accumulate into `grad` when a Tape's
// backward pass reaches the parameter's leaf node.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape(), 0.0) {}
  void zero_grad() { grad.fill(0.0); }
  int64_t numel() const { return value.numel(); }
};

struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Records one forward pass. Ops append nodes; backward() walks the nodes in
// reverse creation order (a topological order by construction) exactly once.
// Every op validates shapes and checks its output for non-finite values.
class Tape {
 public:
  explicit Tape(bool train_mode = false) : train_mode_(train_mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool train_mode() const { return train_mode_; }

  Var constant(Tensor t);
  Var leaf(Parameter& p);  // memoized: one node per parameter per tape

  const Tensor& val(Var v) const { return nodes_[v.id].value; }
  const Tensor& grad_of(Var v) const { return nodes_[v.id].grad; }

  // elementwise
  Var add(Var a, Var b);
  Var add_n(const std::vector<Var>& xs);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var affine_scalar(Var x, double mul, double add);  // mul*x + add
  Var neg(Var x) { return affine_scalar(x, -1.0, 0.0); }
  Var scale(Var x, double c) { return affine_scalar(x, c, 0.0); }
  Var scale_by(Var x, Var scalar);  // x * scalar-var, broadcast

  // linear algebra
  Var matmul(Var a, Var b);     // (m,k)x(k,n)
  Var matmul_nt(Var a, Var b);  // (m,k)x(n,k)^T -> (m,n)
  Var matvec(Var w, Var x);     // (m,n)x(n) -> (m)
  Var vecmat(Var x, Var w);     // (m)x(m,n) -> (n)
  Var add_rowvec(Var mat, Var vec);

  // structure
  Var rows(Var mat, std::vector<int64_t> indices);
  Var row(Var mat, int64_t index);
  Var append_row(Var mat, Var vec);
  Var stack_rows(const std::vector<Var>& rows);
  Var col_slice(Var mat, int64_t offset, int64_t count);
  Var concat_cols(const std::vector<Var>& mats);
  Var slice(Var vec, int64_t offset, int64_t count);
  Var concat(const std::vector<Var>& vecs);
  Var reshape(Var x, std::vector<int64_t> shape);
  Var pick(Var vec, int64_t index);  // element -> scalar

  // nonlinearities
  Var relu(Var x);
  Var sigmoid(Var x);
  Var tanh_op(Var x);
  Var log_op(Var x);  // input clamped at 1e-12

  // Inverted dropout; identity when the tape is not in train mode.
  Var dropout(Var x, double p, Rng& rng);

  // Row-wise softmax over unmasked slots; masked slots get exactly 0 and a
  // row with no unmasked slot yields all zeros (reported via the flag).
  // Max-subtraction and the normalizing sum only touch unmasked entries, so
  // masked inputs cannot influence the output even at the bit level.
  Var masked_softmax(Var logits, const Tensor& mask,
                     bool* any_all_masked = nullptr);
  Var softmax(Var logits);

  // U[p] = sum over unmasked q of weights[p][q] * values[q]
  Var attend(Var weights, Var values, const Tensor& mask);

  // out[p][q] = bias[types[p][q]] where types[p][q] >= 0, else 0
  Var relation_bias(Var bias_vec, const std::vector<std::vector<int>>& types);

  // reductions / losses
  Var sum(Var x);
  Var mean(Var x);
  Var cross_entropy(Var probs, int64_t target);      // -log p[target]
  Var bce(Var prob_scalar, double label);            // binary cross-entropy

  // Runs the reverse sweep from `loss` (which must be scalar) and adds the
  // resulting leaf gradients into their Parameters. Bit-exactly repeatable.
  void backward(Var loss);

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> back;  // null for constants/leaves
    Parameter* param = nullptr;
  };

  Var push(Tensor value, std::function<void(Tape&)> back, const char* op);
  Tensor& g(Var v) { return nodes_[v.id].grad; }
  const Tensor& v(Var x) const { return nodes_[x.id].value; }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, Var> param_nodes_;
  bool train_mode_;
};

}  // namespace edgeflow
