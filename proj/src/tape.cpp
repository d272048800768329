#include "edgeflow/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgeflow {

namespace {
constexpr double kLogEps = 1e-12;

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                              a.shape_str() + " vs " + b.shape_str());
}

void require(bool cond, const char* op, const char* what) {
  if (!cond) throw std::invalid_argument(std::string(op) + ": " + what);
}
}  // namespace

Var Tape::push(Tensor value, std::function<void(Tape&)> back, const char* op) {
  if (!value.all_finite())
    throw std::runtime_error(std::string("non-finite result in ") + op);
  Node n;
  n.grad = Tensor(value.shape(), 0.0);
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor t) { return push(std::move(t), nullptr, "constant"); }

Var Tape::leaf(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return it->second;
  Var var = push(p.value, nullptr, "leaf");
  nodes_[var.id].param = &p;
  param_nodes_.emplace(&p, var);
  return var;
}

Var Tape::add(Var a, Var b) {
  const Tensor &ta = v(a), &tb = v(b);
  if (!ta.same_shape(tb)) shape_error("add", ta, tb);
  Tensor out = ta;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] += tb[i];
  Var o = push(std::move(out), nullptr, "add");
  nodes_[o.id].back = [a, b, o](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor &ga = t.g(a), &gb = t.g(b);
    for (int64_t i = 0; i < go.numel(); ++i) {
      ga[i] += go[i];
      gb[i] += go[i];
    }
  };
  return o;
}

Var Tape::add_n(const std::vector<Var>& xs) {
  require(!xs.empty(), "add_n", "empty input list");
  Tensor out = v(xs[0]);
  for (size_t i = 1; i < xs.size(); ++i) {
    const Tensor& ti = v(xs[i]);
    if (!ti.same_shape(out)) shape_error("add_n", out, ti);
    for (int64_t j = 0; j < out.numel(); ++j) out[j] += ti[j];
  }
  Var o = push(std::move(out), nullptr, "add_n");
  std::vector<Var> inputs = xs;
  nodes_[o.id].back = [inputs, o](Tape& t) {
    const Tensor& go = t.g(o);
    for (Var x : inputs) {
      Tensor& gx = t.g(x);
      for (int64_t i = 0; i < go.numel(); ++i) gx[i] += go[i];
    }
  };
  return o;
}

Var Tape::sub(Var a, Var b) {
  const Tensor &ta = v(a), &tb = v(b);
  if (!ta.same_shape(tb)) shape_error("sub", ta, tb);
  Tensor out = ta;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] -= tb[i];
  Var o = push(std::move(out), nullptr, "sub");
  nodes_[o.id].back = [a, b, o](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor &ga = t.g(a), &gb = t.g(b);
    for (int64_t i = 0; i < go.numel(); ++i) {
      ga[i] += go[i];
      gb[i] -= go[i];
    }
  };
  return o;
}

Var Tape::mul(Var a, Var b) {
  const Tensor &ta = v(a), &tb = v(b);
  if (!ta.same_shape(tb)) shape_error("mul", ta, tb);
  Tensor out = ta;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= tb[i];
  Var o = push(std::move(out), nullptr, "mul");
  nodes_[o.id].back = [a, b, o](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor &ta = t.v(a), &tb = t.v(b);
    Tensor &ga = t.g(a), &gb = t.g(b);
    for (int64_t i = 0; i < go.numel(); ++i) {
      ga[i] += go[i] * tb[i];
      gb[i] += go[i] * ta[i];
    }
  };
  return o;
}

Var Tape::affine_scalar(Var x, double mul, double add) {
  Tensor out = v(x);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = mul * out[i] + add;
  Var o = push(std::move(out), nullptr, "affine_scalar");
  nodes_[o.id].back = [x, o, mul](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < go.numel(); ++i) gx[i] += mul * go[i];
  };
  return o;
}

Var Tape::scale_by(Var x, Var scalar) {
  const Tensor& ts = v(scalar);
  require(ts.numel() == 1, "scale_by", "scale argument must be a scalar");
  double s = ts[0];
  Tensor out = v(x);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
  Var o = push(std::move(out), nullptr, "scale_by");
  nodes_[o.id].back = [x, scalar, o](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor& tx = t.v(x);
    double s = t.v(scalar)[0];
    Tensor& gx = t.g(x);
    double gs = 0.0;
    for (int64_t i = 0; i < go.numel(); ++i) {
      gx[i] += s * go[i];
      gs += go[i] * tx[i];
    }
    t.g(scalar)[0] += gs;
  };
  return o;
}

Var Tape::matmul(Var a, Var b) {
  const Tensor &ta = v(a), &tb = v(b);
  require(ta.shape().size() == 2 && tb.shape().size() == 2, "matmul",
          "operands must be matrices");
  if (ta.cols() != tb.rows()) shape_error("matmul", ta, tb);
  int64_t m = ta.rows(), k = ta.cols(), n = tb.cols();
  Tensor out = Tensor::matrix(m, n);
  for (int64_t i = 0; i < m; ++i)
    for (int64_t p = 0; p < k; ++p) {
      double av = ta.at(i, p);
      if (av == 0.0) continue;
      for (int64_t j = 0; j < n; ++j) out.at(i, j) += av * tb.at(p, j);
    }
  Var o = push(std::move(out), nullptr, "matmul");
  nodes_[o.id].back = [a, b, o, m, k, n](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor &ta = t.v(a), &tb = t.v(b);
    Tensor &ga = t.g(a), &gb = t.g(b);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) {
        double gij = go.at(i, j);
        if (gij == 0.0) continue;
        for (int64_t p = 0; p < k; ++p) {
          ga.at(i, p) += gij * tb.at(p, j);
          gb.at(p, j) += gij * ta.at(i, p);
        }
      }
  };
  return o;
}

Var Tape::matmul_nt(Var a, Var b) {
  const Tensor &ta = v(a), &tb = v(b);
  require(ta.shape().size() == 2 && tb.shape().size() == 2, "matmul_nt",
          "operands must be matrices");
  if (ta.cols() != tb.cols()) shape_error("matmul_nt", ta, tb);
  int64_t m = ta.rows(), k = ta.cols(), n = tb.rows();
  Tensor out = Tensor::matrix(m, n);
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += ta.at(i, p) * tb.at(j, p);
      out.at(i, j) = acc;
    }
  Var o = push(std::move(out), nullptr, "matmul_nt");
  nodes_[o.id].back = [a, b, o, m, k, n](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor &ta = t.v(a), &tb = t.v(b);
    Tensor &ga = t.g(a), &gb = t.g(b);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) {
        double gij = go.at(i, j);
        if (gij == 0.0) continue;
        for (int64_t p = 0; p < k; ++p) {
          ga.at(i, p) += gij * tb.at(j, p);
          gb.at(j, p) += gij * ta.at(i, p);
        }
      }
  };
  return o;
}

Var Tape::matvec(Var w, Var x) {
  const Tensor &tw = v(w), &tx = v(x);
  require(tw.shape().size() == 2 && tx.shape().size() == 1, "matvec",
          "expects matrix, vector");
  if (tw.cols() != tx.numel()) shape_error("matvec", tw, tx);
  int64_t m = tw.rows(), n = tw.cols();
  Tensor out({m});
  for (int64_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int64_t j = 0; j < n; ++j) acc += tw.at(i, j) * tx[j];
    out[i] = acc;
  }
  Var o = push(std::move(out), nullptr, "matvec");
  nodes_[o.id].back = [w, x, o, m, n](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor &tw = t.v(w), &tx = t.v(x);
    Tensor &gw = t.g(w), &gx = t.g(x);
    for (int64_t i = 0; i < m; ++i) {
      double gi = go[i];
      if (gi == 0.0) continue;
      for (int64_t j = 0; j < n; ++j) {
        gw.at(i, j) += gi * tx[j];
        gx[j] += gi * tw.at(i, j);
      }
    }
  };
  return o;
}

Var Tape::vecmat(Var x, Var w) {
  const Tensor &tx = v(x), &tw = v(w);
  require(tx.shape().size() == 1 && tw.shape().size() == 2, "vecmat",
          "expects vector, matrix");
  if (tx.numel() != tw.rows()) shape_error("vecmat", tx, tw);
  int64_t m = tw.rows(), n = tw.cols();
  Tensor out({n});
  for (int64_t i = 0; i < m; ++i) {
    double xi = tx[i];
    if (xi == 0.0) continue;
    for (int64_t j = 0; j < n; ++j) out[j] += xi * tw.at(i, j);
  }
  Var o = push(std::move(out), nullptr, "vecmat");
  nodes_[o.id].back = [x, w, o, m, n](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor &tx = t.v(x), &tw = t.v(w);
    Tensor &gx = t.g(x), &gw = t.g(w);
    for (int64_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int64_t j = 0; j < n; ++j) {
        acc += go[j] * tw.at(i, j);
        gw.at(i, j) += tx[i] * go[j];
      }
      gx[i] += acc;
    }
  };
  return o;
}

Var Tape::add_rowvec(Var mat, Var vec) {
  const Tensor &tm = v(mat), &tv = v(vec);
  require(tm.shape().size() == 2 && tv.shape().size() == 1, "add_rowvec",
          "expects matrix, vector");
  if (tm.cols() != tv.numel()) shape_error("add_rowvec", tm, tv);
  Tensor out = tm;
  for (int64_t i = 0; i < tm.rows(); ++i)
    for (int64_t j = 0; j < tm.cols(); ++j) out.at(i, j) += tv[j];
  Var o = push(std::move(out), nullptr, "add_rowvec");
  nodes_[o.id].back = [mat, vec, o](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor &gm = t.g(mat), &gv = t.g(vec);
    for (int64_t i = 0; i < go.rows(); ++i)
      for (int64_t j = 0; j < go.cols(); ++j) {
        gm.at(i, j) += go.at(i, j);
        gv[j] += go.at(i, j);
      }
  };
  return o;
}

Var Tape::rows(Var mat, std::vector<int64_t> indices) {
  const Tensor& tm = v(mat);
  require(tm.shape().size() == 2, "rows", "expects a matrix");
  for (int64_t idx : indices)
    require(idx >= 0 && idx < tm.rows(), "rows", "row index out of range");
  Tensor out = Tensor::matrix(static_cast<int64_t>(indices.size()), tm.cols());
  for (size_t i = 0; i < indices.size(); ++i)
    for (int64_t j = 0; j < tm.cols(); ++j)
      out.at(static_cast<int64_t>(i), j) = tm.at(indices[i], j);
  Var o = push(std::move(out), nullptr, "rows");
  nodes_[o.id].back = [mat, o, indices](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gm = t.g(mat);
    for (size_t i = 0; i < indices.size(); ++i)
      for (int64_t j = 0; j < go.cols(); ++j)
        gm.at(indices[i], j) += go.at(static_cast<int64_t>(i), j);
  };
  return o;
}

Var Tape::row(Var mat, int64_t index) {
  const Tensor& tm = v(mat);
  require(tm.shape().size() == 2, "row", "expects a matrix");
  require(index >= 0 && index < tm.rows(), "row", "row index out of range");
  Tensor out({tm.cols()});
  for (int64_t j = 0; j < tm.cols(); ++j) out[j] = tm.at(index, j);
  Var o = push(std::move(out), nullptr, "row");
  nodes_[o.id].back = [mat, o, index](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gm = t.g(mat);
    for (int64_t j = 0; j < go.numel(); ++j) gm.at(index, j) += go[j];
  };
  return o;
}

Var Tape::append_row(Var mat, Var vec) {
  const Tensor &tm = v(mat), &tv = v(vec);
  require(tm.shape().size() == 2 && tv.shape().size() == 1, "append_row",
          "expects matrix, vector");
  if (tm.cols() != tv.numel()) shape_error("append_row", tm, tv);
  Tensor out = Tensor::matrix(tm.rows() + 1, tm.cols());
  for (int64_t i = 0; i < tm.rows(); ++i)
    for (int64_t j = 0; j < tm.cols(); ++j) out.at(i, j) = tm.at(i, j);
  for (int64_t j = 0; j < tm.cols(); ++j) out.at(tm.rows(), j) = tv[j];
  Var o = push(std::move(out), nullptr, "append_row");
  nodes_[o.id].back = [mat, vec, o](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor &gm = t.g(mat), &gv = t.g(vec);
    int64_t last = go.rows() - 1;
    for (int64_t i = 0; i < last; ++i)
      for (int64_t j = 0; j < go.cols(); ++j) gm.at(i, j) += go.at(i, j);
    for (int64_t j = 0; j < go.cols(); ++j) gv[j] += go.at(last, j);
  };
  return o;
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
  require(!rows.empty(), "stack_rows", "empty row list");
  int64_t cols = v(rows[0]).numel();
  for (Var r : rows) {
    require(v(r).shape().size() == 1, "stack_rows", "rows must be vectors");
    if (v(r).numel() != cols) shape_error("stack_rows", v(rows[0]), v(r));
  }
  Tensor out = Tensor::matrix(static_cast<int64_t>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int64_t j = 0; j < cols; ++j)
      out.at(static_cast<int64_t>(i), j) = v(rows[i])[j];
  Var o = push(std::move(out), nullptr, "stack_rows");
  std::vector<Var> inputs = rows;
  nodes_[o.id].back = [inputs, o](Tape& t) {
    const Tensor& go = t.g(o);
    for (size_t i = 0; i < inputs.size(); ++i) {
      Tensor& gr = t.g(inputs[i]);
      for (int64_t j = 0; j < go.cols(); ++j)
        gr[j] += go.at(static_cast<int64_t>(i), j);
    }
  };
  return o;
}

Var Tape::col_slice(Var mat, int64_t offset, int64_t count) {
  const Tensor& tm = v(mat);
  require(tm.shape().size() == 2, "col_slice", "expects a matrix");
  require(offset >= 0 && count >= 0 && offset + count <= tm.cols(),
          "col_slice", "slice out of range");
  Tensor out = Tensor::matrix(tm.rows(), count);
  for (int64_t i = 0; i < tm.rows(); ++i)
    for (int64_t j = 0; j < count; ++j) out.at(i, j) = tm.at(i, offset + j);
  Var o = push(std::move(out), nullptr, "col_slice");
  nodes_[o.id].back = [mat, o, offset, count](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gm = t.g(mat);
    for (int64_t i = 0; i < go.rows(); ++i)
      for (int64_t j = 0; j < count; ++j)
        gm.at(i, offset + j) += go.at(i, j);
  };
  return o;
}

Var Tape::concat_cols(const std::vector<Var>& mats) {
  require(!mats.empty(), "concat_cols", "empty input list");
  int64_t rows_n = v(mats[0]).rows();
  int64_t total = 0;
  for (Var m : mats) {
    require(v(m).shape().size() == 2, "concat_cols", "expects matrices");
    if (v(m).rows() != rows_n) shape_error("concat_cols", v(mats[0]), v(m));
    total += v(m).cols();
  }
  Tensor out = Tensor::matrix(rows_n, total);
  int64_t off = 0;
  for (Var m : mats) {
    const Tensor& tm = v(m);
    for (int64_t i = 0; i < rows_n; ++i)
      for (int64_t j = 0; j < tm.cols(); ++j)
        out.at(i, off + j) = tm.at(i, j);
    off += tm.cols();
  }
  Var o = push(std::move(out), nullptr, "concat_cols");
  std::vector<Var> inputs = mats;
  nodes_[o.id].back = [inputs, o](Tape& t) {
    const Tensor& go = t.g(o);
    int64_t off = 0;
    for (Var m : inputs) {
      Tensor& gm = t.g(m);
      for (int64_t i = 0; i < gm.rows(); ++i)
        for (int64_t j = 0; j < gm.cols(); ++j)
          gm.at(i, j) += go.at(i, off + j);
      off += gm.cols();
    }
  };
  return o;
}

Var Tape::slice(Var vec, int64_t offset, int64_t count) {
  const Tensor& tv = v(vec);
  require(tv.shape().size() == 1, "slice", "expects a vector");
  require(offset >= 0 && count >= 0 && offset + count <= tv.numel(), "slice",
          "slice out of range");
  Tensor out({count});
  for (int64_t i = 0; i < count; ++i) out[i] = tv[offset + i];
  Var o = push(std::move(out), nullptr, "slice");
  nodes_[o.id].back = [vec, o, offset, count](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gv = t.g(vec);
    for (int64_t i = 0; i < count; ++i) gv[offset + i] += go[i];
  };
  return o;
}

Var Tape::concat(const std::vector<Var>& vecs) {
  require(!vecs.empty(), "concat", "empty input list");
  int64_t total = 0;
  for (Var x : vecs) {
    require(v(x).shape().size() == 1, "concat", "expects vectors");
    total += v(x).numel();
  }
  Tensor out({total});
  int64_t off = 0;
  for (Var x : vecs) {
    const Tensor& tx = v(x);
    for (int64_t i = 0; i < tx.numel(); ++i) out[off + i] = tx[i];
    off += tx.numel();
  }
  Var o = push(std::move(out), nullptr, "concat");
  std::vector<Var> inputs = vecs;
  nodes_[o.id].back = [inputs, o](Tape& t) {
    const Tensor& go = t.g(o);
    int64_t off = 0;
    for (Var x : inputs) {
      Tensor& gx = t.g(x);
      for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += go[off + i];
      off += gx.numel();
    }
  };
  return o;
}

Var Tape::reshape(Var x, std::vector<int64_t> shape) {
  const Tensor& tx = v(x);
  Tensor out(shape);
  require(out.numel() == tx.numel(), "reshape", "element count mismatch");
  for (int64_t i = 0; i < tx.numel(); ++i) out[i] = tx[i];
  Var o = push(std::move(out), nullptr, "reshape");
  nodes_[o.id].back = [x, o](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < go.numel(); ++i) gx[i] += go[i];
  };
  return o;
}

Var Tape::pick(Var vec, int64_t index) {
  const Tensor& tv = v(vec);
  require(tv.shape().size() == 1, "pick", "expects a vector");
  require(index >= 0 && index < tv.numel(), "pick", "index out of range");
  Var o = push(Tensor::scalar(tv[index]), nullptr, "pick");
  nodes_[o.id].back = [vec, o, index](Tape& t) {
    t.g(vec)[index] += t.g(o)[0];
  };
  return o;
}

Var Tape::relu(Var x) {
  Tensor out = v(x);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::max(0.0, out[i]);
  Var o = push(std::move(out), nullptr, "relu");
  nodes_[o.id].back = [x, o](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor& tx = t.v(x);
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < go.numel(); ++i)
      if (tx[i] > 0.0) gx[i] += go[i];
  };
  return o;
}

Var Tape::sigmoid(Var x) {
  Tensor out = v(x);
  for (int64_t i = 0; i < out.numel(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  Var o = push(std::move(out), nullptr, "sigmoid");
  nodes_[o.id].back = [x, o](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor& to = t.v(o);
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < go.numel(); ++i)
      gx[i] += go[i] * to[i] * (1.0 - to[i]);
  };
  return o;
}

Var Tape::tanh_op(Var x) {
  Tensor out = v(x);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  Var o = push(std::move(out), nullptr, "tanh");
  nodes_[o.id].back = [x, o](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor& to = t.v(o);
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < go.numel(); ++i)
      gx[i] += go[i] * (1.0 - to[i] * to[i]);
  };
  return o;
}

Var Tape::log_op(Var x) {
  Tensor out = v(x);
  for (int64_t i = 0; i < out.numel(); ++i)
    out[i] = std::log(std::max(out[i], kLogEps));
  Var o = push(std::move(out), nullptr, "log");
  nodes_[o.id].back = [x, o](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor& tx = t.v(x);
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < go.numel(); ++i)
      if (tx[i] > kLogEps) gx[i] += go[i] / tx[i];
  };
  return o;
}

Var Tape::dropout(Var x, double p, Rng& rng) {
  require(p >= 0.0 && p < 1.0, "dropout", "p must be in [0, 1)");
  if (!train_mode_ || p == 0.0) return x;
  const Tensor& tx = v(x);
  Tensor mask(tx.shape());
  double keep = 1.0 - p;
  for (int64_t i = 0; i < mask.numel(); ++i)
    mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
  Tensor out = tx;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= mask[i];
  Var o = push(std::move(out), nullptr, "dropout");
  nodes_[o.id].back = [x, o, mask](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < go.numel(); ++i) gx[i] += go[i] * mask[i];
  };
  return o;
}

Var Tape::masked_softmax(Var logits, const Tensor& mask,
                         bool* any_all_masked) {
  const Tensor& tx = v(logits);
  if (!tx.same_shape(mask)) shape_error("masked_softmax", tx, mask);
  int64_t rows = tx.shape().size() == 2 ? tx.rows() : 1;
  int64_t cols = tx.shape().size() == 2 ? tx.cols() : tx.numel();
  Tensor out(tx.shape(), 0.0);
  bool empty_row = false;
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = tx.data() + r * cols;
    const double* mr = mask.data() + r * cols;
    double* yr = out.data() + r * cols;
    double mx = 0.0;
    bool any = false;
    for (int64_t j = 0; j < cols; ++j)
      if (mr[j] > 0.5 && (!any || xr[j] > mx)) {
        mx = xr[j];
        any = true;
      }
    if (!any) {
      empty_row = true;
      continue;
    }
    double z = 0.0;
    for (int64_t j = 0; j < cols; ++j)
      if (mr[j] > 0.5) {
        yr[j] = std::exp(xr[j] - mx);
        z += yr[j];
      }
    for (int64_t j = 0; j < cols; ++j)
      if (mr[j] > 0.5) yr[j] /= z;
  }
  if (any_all_masked) *any_all_masked = empty_row;
  Var o = push(std::move(out), nullptr, "masked_softmax");
  nodes_[o.id].back = [logits, o, mask, rows, cols](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor& y = t.v(o);
    Tensor& gx = t.g(logits);
    for (int64_t r = 0; r < rows; ++r) {
      const double* yr = y.data() + r * cols;
      const double* gr = go.data() + r * cols;
      const double* mr = mask.data() + r * cols;
      double dot = 0.0;
      for (int64_t j = 0; j < cols; ++j)
        if (mr[j] > 0.5) dot += yr[j] * gr[j];
      double* gxr = gx.data() + r * cols;
      for (int64_t j = 0; j < cols; ++j)
        if (mr[j] > 0.5) gxr[j] += yr[j] * (gr[j] - dot);
    }
  };
  return o;
}

Var Tape::softmax(Var logits) {
  Tensor mask(v(logits).shape(), 1.0);
  return masked_softmax(logits, mask);
}

Var Tape::attend(Var weights, Var values, const Tensor& mask) {
  const Tensor &tw = v(weights), &tv = v(values);
  require(tw.shape().size() == 2 && tv.shape().size() == 2, "attend",
          "expects matrices");
  if (!tw.same_shape(mask)) shape_error("attend", tw, mask);
  if (tw.cols() != tv.rows()) shape_error("attend", tw, tv);
  int64_t n = tw.rows(), m = tw.cols(), d = tv.cols();
  Tensor out = Tensor::matrix(n, d);
  for (int64_t p = 0; p < n; ++p)
    for (int64_t q = 0; q < m; ++q) {
      if (mask.at(p, q) <= 0.5) continue;
      double w = tw.at(p, q);
      for (int64_t j = 0; j < d; ++j) out.at(p, j) += w * tv.at(q, j);
    }
  Var o = push(std::move(out), nullptr, "attend");
  nodes_[o.id].back = [weights, values, o, mask, n, m, d](Tape& t) {
    const Tensor& go = t.g(o);
    const Tensor &tw = t.v(weights), &tv = t.v(values);
    Tensor &gw = t.g(weights), &gv = t.g(values);
    for (int64_t p = 0; p < n; ++p)
      for (int64_t q = 0; q < m; ++q) {
        if (mask.at(p, q) <= 0.5) continue;
        double w = tw.at(p, q);
        double acc = 0.0;
        for (int64_t j = 0; j < d; ++j) {
          acc += go.at(p, j) * tv.at(q, j);
          gv.at(q, j) += w * go.at(p, j);
        }
        gw.at(p, q) += acc;
      }
  };
  return o;
}

Var Tape::relation_bias(Var bias_vec,
                        const std::vector<std::vector<int>>& types) {
  const Tensor& tb = v(bias_vec);
  require(tb.shape().size() == 1, "relation_bias", "bias must be a vector");
  int64_t n = static_cast<int64_t>(types.size());
  int64_t m = n > 0 ? static_cast<int64_t>(types[0].size()) : 0;
  Tensor out = Tensor::matrix(n, m);
  for (int64_t p = 0; p < n; ++p) {
    require(static_cast<int64_t>(types[p].size()) == m, "relation_bias",
            "ragged type matrix");
    for (int64_t q = 0; q < m; ++q) {
      int e = types[p][q];
      if (e < 0) continue;
      require(e < tb.numel(), "relation_bias", "unregistered relation id");
      out.at(p, q) = tb[e];
    }
  }
  Var o = push(std::move(out), nullptr, "relation_bias");
  nodes_[o.id].back = [bias_vec, o, types, n, m](Tape& t) {
    const Tensor& go = t.g(o);
    Tensor& gb = t.g(bias_vec);
    for (int64_t p = 0; p < n; ++p)
      for (int64_t q = 0; q < m; ++q) {
        int e = types[p][q];
        if (e >= 0) gb[e] += go.at(p, q);
      }
  };
  return o;
}

Var Tape::sum(Var x) {
  const Tensor& tx = v(x);
  double acc = 0.0;
  for (int64_t i = 0; i < tx.numel(); ++i) acc += tx[i];
  Var o = push(Tensor::scalar(acc), nullptr, "sum");
  nodes_[o.id].back = [x, o](Tape& t) {
    double go = t.g(o)[0];
    Tensor& gx = t.g(x);
    for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += go;
  };
  return o;
}

Var Tape::mean(Var x) {
  const Tensor& tx = v(x);
  require(tx.numel() > 0, "mean", "empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(tx.numel()));
}

Var Tape::cross_entropy(Var probs, int64_t target) {
  const Tensor& tp = v(probs);
  require(tp.shape().size() == 1, "cross_entropy", "expects a vector");
  require(target >= 0 && target < tp.numel(), "cross_entropy",
          "target out of range");
  double p = std::max(tp[target], kLogEps);
  Var o = push(Tensor::scalar(-std::log(p)), nullptr, "cross_entropy");
  nodes_[o.id].back = [probs, o, target](Tape& t) {
    double p = std::max(t.v(probs)[target], kLogEps);
    t.g(probs)[target] += t.g(o)[0] * (-1.0 / p);
  };
  return o;
}

Var Tape::bce(Var prob_scalar, double label) {
  const Tensor& tp = v(prob_scalar);
  require(tp.numel() == 1, "bce", "expects a scalar probability");
  require(label == 0.0 || label == 1.0, "bce", "label must be 0 or 1");
  double p = std::min(std::max(tp[0], kLogEps), 1.0 - kLogEps);
  double loss = -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
  Var o = push(Tensor::scalar(loss), nullptr, "bce");
  nodes_[o.id].back = [prob_scalar, o, label](Tape& t) {
    double p = std::min(std::max(t.v(prob_scalar)[0], kLogEps), 1.0 - kLogEps);
    t.g(prob_scalar)[0] += t.g(o)[0] * (p - label) / (p * (1.0 - p));
  };
  return o;
}

void Tape::backward(Var loss) {
  require(loss.valid() && loss.id < static_cast<int32_t>(nodes_.size()),
          "backward", "invalid loss var");
  require(v(loss).numel() == 1, "backward", "loss must be scalar");
  nodes_[loss.id].grad.fill(0.0);
  nodes_[loss.id].grad[0] = 1.0;
  for (int32_t i = loss.id; i >= 0; --i) {
    if (nodes_[i].back) nodes_[i].back(*this);
  }
  for (auto& [param, var] : param_nodes_) {
    Parameter* p = nodes_[var.id].param;
    const Tensor& gn = nodes_[var.id].grad;
    for (int64_t i = 0; i < gn.numel(); ++i) p->grad[i] += gn[i];
  }
}

}  // namespace edgeflow
