#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "edgeflow/tape.hpp"

namespace edgeflow {

// Owns Parameters in creation order. Names must be unique; the order is the
// serialization order, so construction must be deterministic.
class ParamRegistry {
 public:
  Parameter* create(const std::string& name, Tensor init);
  Parameter* find(const std::string& name) const;
  const std::vector<std::unique_ptr<Parameter>>& all() const {
    return params_;
  }
  std::vector<Parameter*> pointers() const;
  int64_t total_scalars() const;
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

Tensor xavier_uniform(Rng& rng, int64_t out_dim, int64_t in_dim);
Tensor normal_init(Rng& rng, const std::vector<int64_t>& shape, double stddev);

// affine -> relu -> affine
struct Ffn {
  Parameter *w1 = nullptr, *b1 = nullptr, *w2 = nullptr, *b2 = nullptr;

  static Ffn create(ParamRegistry& reg, const std::string& prefix,
                    int64_t in_dim, int64_t hidden_dim, int64_t out_dim,
                    Rng& rng);
  // x may be a vector (in_dim) or a matrix (N x in_dim), applied row-wise.
  Var apply(Tape& t, Var x) const;
};

// r = sig(Wr x + Ur h + br), z = sig(Wz x + Uz h + bz),
// n = tanh(Wn x + Un (r*h) + bn), h' = (1-z)*n + z*h
struct GruCell {
  int64_t input_dim = 0, hidden_dim = 0;
  Parameter *wr, *ur, *br, *wz, *uz, *bz, *wn, *un, *bn;

  static GruCell create(ParamRegistry& reg, const std::string& prefix,
                        int64_t input_dim, int64_t hidden_dim, Rng& rng);
  Var step(Tape& t, Var x, Var h_prev) const;
};

// score_i = v . tanh(Wq q + Wk k_i + b); weights = softmax(scores);
// context = weights . keys
struct AdditiveAttention {
  Parameter *w_query, *w_keys, *bias, *v;

  static AdditiveAttention create(ParamRegistry& reg,
                                  const std::string& prefix, int64_t query_dim,
                                  int64_t key_dim, int64_t attn_dim, Rng& rng);
  struct Result {
    Var weights;  // (num_keys)
    Var context;  // (key_dim)
  };
  Result apply(Tape& t, Var query, Var keys) const;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  int64_t worst_index = -1;
};

// Central finite differences against the analytic gradients produced by
// loss_fn(true). loss_fn(false) must be a pure re-evaluation; the harness
// evaluates it twice up front and rejects non-deterministic closures.
// Relative error: |ad - fd| / max(1e-8, |ad| + |fd|).
GradCheckResult finite_diff_check(const std::function<double(bool)>& loss_fn,
                                  const std::vector<Parameter*>& params,
                                  double eps = 1e-5);

}  // namespace edgeflow
