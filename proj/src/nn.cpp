#include "edgeflow/nn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace edgeflow {

Parameter* ParamRegistry::create(const std::string& name, Tensor init) {
  if (find(name))
    throw std::invalid_argument("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
  return params_.back().get();
}

Parameter* ParamRegistry::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

std::vector<Parameter*> ParamRegistry::pointers() const {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

int64_t ParamRegistry::total_scalars() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p->numel();
  return n;
}

void ParamRegistry::zero_grads() {
  for (const auto& p : params_) p->zero_grad();
}

Tensor xavier_uniform(Rng& rng, int64_t out_dim, int64_t in_dim) {
  double a = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  Tensor t = Tensor::matrix(out_dim, in_dim);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-a, a);
  return t;
}

Tensor normal_init(Rng& rng, const std::vector<int64_t>& shape,
                   double stddev) {
  Tensor t(shape);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.normal() * stddev;
  return t;
}

namespace {
// Bias init is small but nonzero. Zero biases leave freshly initialized
// FFN rows emitting exact zeros, which parks downstream ReLUs on their
// kink and makes finite-difference verification ill-posed there.
Tensor bias_init(Rng& rng, int64_t dim) {
  Tensor t({dim});
  for (int64_t i = 0; i < dim; ++i) t[i] = rng.uniform(-0.1, 0.1);
  return t;
}
}  // namespace

Ffn Ffn::create(ParamRegistry& reg, const std::string& prefix, int64_t in_dim,
                int64_t hidden_dim, int64_t out_dim, Rng& rng) {
  Ffn f;
  f.w1 = reg.create(prefix + ".w1", xavier_uniform(rng, hidden_dim, in_dim));
  f.b1 = reg.create(prefix + ".b1", bias_init(rng, hidden_dim));
  f.w2 = reg.create(prefix + ".w2", xavier_uniform(rng, out_dim, hidden_dim));
  f.b2 = reg.create(prefix + ".b2", bias_init(rng, out_dim));
  return f;
}

Var Ffn::apply(Tape& t, Var x) const {
  Var vw1 = t.leaf(*w1), vb1 = t.leaf(*b1);
  Var vw2 = t.leaf(*w2), vb2 = t.leaf(*b2);
  bool is_matrix = t.val(x).shape().size() == 2;
  Var h = is_matrix ? t.add_rowvec(t.matmul_nt(x, vw1), vb1)
                    : t.add(t.matvec(vw1, x), vb1);
  h = t.relu(h);
  return is_matrix ? t.add_rowvec(t.matmul_nt(h, vw2), vb2)
                   : t.add(t.matvec(vw2, h), vb2);
}

GruCell GruCell::create(ParamRegistry& reg, const std::string& prefix,
                        int64_t input_dim, int64_t hidden_dim, Rng& rng) {
  GruCell c;
  c.input_dim = input_dim;
  c.hidden_dim = hidden_dim;
  auto mk_w = [&](const char* n) {
    return reg.create(prefix + "." + n, xavier_uniform(rng, hidden_dim, input_dim));
  };
  auto mk_u = [&](const char* n) {
    return reg.create(prefix + "." + n, xavier_uniform(rng, hidden_dim, hidden_dim));
  };
  auto mk_b = [&](const char* n) {
    return reg.create(prefix + "." + n, bias_init(rng, hidden_dim));
  };
  c.wr = mk_w("wr"); c.ur = mk_u("ur"); c.br = mk_b("br");
  c.wz = mk_w("wz"); c.uz = mk_u("uz"); c.bz = mk_b("bz");
  c.wn = mk_w("wn"); c.un = mk_u("un"); c.bn = mk_b("bn");
  return c;
}

Var GruCell::step(Tape& t, Var x, Var h_prev) const {
  Var r = t.sigmoid(t.add(t.add(t.matvec(t.leaf(*wr), x),
                                t.matvec(t.leaf(*ur), h_prev)),
                          t.leaf(*br)));
  Var z = t.sigmoid(t.add(t.add(t.matvec(t.leaf(*wz), x),
                                t.matvec(t.leaf(*uz), h_prev)),
                          t.leaf(*bz)));
  Var n = t.tanh_op(t.add(t.add(t.matvec(t.leaf(*wn), x),
                                t.matvec(t.leaf(*un), t.mul(r, h_prev))),
                          t.leaf(*bn)));
  Var one_minus_z = t.affine_scalar(z, -1.0, 1.0);
  return t.add(t.mul(one_minus_z, n), t.mul(z, h_prev));
}

AdditiveAttention AdditiveAttention::create(ParamRegistry& reg,
                                            const std::string& prefix,
                                            int64_t query_dim, int64_t key_dim,
                                            int64_t attn_dim, Rng& rng) {
  AdditiveAttention a;
  a.w_query =
      reg.create(prefix + ".wq", xavier_uniform(rng, attn_dim, query_dim));
  a.w_keys = reg.create(prefix + ".wk", xavier_uniform(rng, attn_dim, key_dim));
  a.bias = reg.create(prefix + ".b", bias_init(rng, attn_dim));
  a.v = reg.create(prefix + ".v", xavier_uniform(rng, 1, attn_dim));
  return a;
}

AdditiveAttention::Result AdditiveAttention::apply(Tape& t, Var query,
                                                   Var keys) const {
  Var q_proj = t.add(t.matvec(t.leaf(*w_query), query), t.leaf(*bias));
  Var k_proj = t.matmul_nt(keys, t.leaf(*w_keys));  // (n, attn)
  Var scores_mat = t.tanh_op(t.add_rowvec(k_proj, q_proj));
  Var scores = t.reshape(t.matmul_nt(scores_mat, t.leaf(*v)),
                         {t.val(keys).rows()});
  Var weights = t.softmax(scores);
  Var context = t.vecmat(weights, keys);
  return {weights, context};
}

GradCheckResult finite_diff_check(const std::function<double(bool)>& loss_fn,
                                  const std::vector<Parameter*>& params,
                                  double eps) {
  double l0 = loss_fn(false);
  double l1 = loss_fn(false);
  if (std::memcmp(&l0, &l1, sizeof(double)) != 0)
    throw std::runtime_error(
        "finite_diff_check: forward pass is not deterministic");

  for (Parameter* p : params) p->zero_grad();
  loss_fn(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    for (int64_t i = 0; i < p->numel(); ++i) {
      double saved = p->value[i];
      p->value[i] = saved + eps;
      double lp = loss_fn(false);
      p->value[i] = saved - eps;
      double lm = loss_fn(false);
      p->value[i] = saved;
      double fd = (lp - lm) / (2.0 * eps);
      double ad = analytic[pi][i];
      double rel =
          std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = p->name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace edgeflow
