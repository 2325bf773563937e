// Copyright 2026 The pronlearn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pronlearn/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pronlearn/errors.hpp"

namespace pronlearn::nn {

const Tensor& Var::value() const { return graph->value(*this); }
const Shape& Var::shape() const { return graph->value(*this).shape(); }

Var Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite constant");
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, {}});
  return Var{this, nodes_.size() - 1};
}

Var Graph::variable(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite variable");
  nodes_.push_back(Node{std::move(value), {}, nullptr, record_, {}});
  return Var{this, nodes_.size() - 1};
}

Var Graph::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{this, it->second};
  nodes_.push_back(Node{{}, {}, &p, record_, {}});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

const Tensor& Graph::value_of(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

const Tensor& Graph::value(Var v) const { return value_of(v.id); }

Tensor& Graph::grad_of(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) {
    if (n.param->grad.shape() != n.param->value.shape()) {
      n.param->grad = Tensor::zeros_like(n.param->value);
    }
    return n.param->grad;
  }
  if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.param) return n.param->grad;
  if (n.grad.empty()) throw InvalidArgument("node has no gradient");
  return n.grad;
}

Var Graph::emit(Tensor value, std::span<const Var> inputs, Backward backward,
                const char* op_name) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op_name);
  }
  bool needs = false;
  if (record_) {
    for (const Var& in : inputs) {
      if (in.graph != this) throw InvalidArgument(std::string(op_name) + ": mixed graphs");
      needs = needs || nodes_[in.id].requires_grad;
    }
  }
  nodes_.push_back(Node{std::move(value), {}, nullptr, needs, needs ? std::move(backward) : nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Graph::emit(Tensor value, std::initializer_list<Var> inputs, Backward backward,
                const char* op_name) {
  return emit(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(backward), op_name);
}

void Graph::backward(Var out) {
  if (!record_) throw InvalidArgument("backward() on a non-recording graph");
  if (value_of(out.id).size() != 1) throw InvalidArgument("backward() needs a scalar output");
  if (!nodes_[out.id].requires_grad) return;
  grad_of(out.id)[0] += 1.0;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward) continue;
    if (n.grad.empty()) continue;  // nothing flowed into this node
    n.backward(*this, i);
  }
}

namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw InvalidArgument(std::string(op) + ": " + what);
}

void require_rank2(const Tensor& t, const char* op) {
  require(t.rank() == 2, op, "expected a matrix, got " + shape_string(t.shape()));
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  require(av.cols() == bv.rows(), "matmul",
          shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  Tensor out({av.rows(), bv.cols()});
  out.mat().noalias() = av.mat() * bv.mat();
  const std::size_t ia = a.id, ib = b.id;
  return g.emit(std::move(out), {a, b}, [ia, ib](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    if (g.needs_grad(ia)) g.grad_of(ia).mat().noalias() += dc.mat() * g.value_of(ib).mat().transpose();
    if (g.needs_grad(ib)) g.grad_of(ib).mat().noalias() += g.value_of(ia).mat().transpose() * dc.mat();
  }, "matmul");
}

Var matmul_bt(Var a, Var b) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul_bt");
  require_rank2(bv, "matmul_bt");
  require(av.cols() == bv.cols(), "matmul_bt",
          shape_string(av.shape()) + " x " + shape_string(bv.shape()) + "^T");
  Tensor out({av.rows(), bv.rows()});
  out.mat().noalias() = av.mat() * bv.mat().transpose();
  const std::size_t ia = a.id, ib = b.id;
  return g.emit(std::move(out), {a, b}, [ia, ib](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    if (g.needs_grad(ia)) g.grad_of(ia).mat().noalias() += dc.mat() * g.value_of(ib).mat();
    if (g.needs_grad(ib)) g.grad_of(ib).mat().noalias() += dc.mat().transpose() * g.value_of(ia).mat();
  }, "matmul_bt");
}

Var transpose(Var a) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  Tensor out({av.cols(), av.rows()});
  out.mat() = av.mat().transpose();
  const std::size_t ia = a.id;
  return g.emit(std::move(out), {a}, [ia](Graph& g, std::size_t self) {
    g.grad_of(ia).mat() += g.grad_of(self).mat().transpose();
  }, "transpose");
}

namespace {

template <typename Fwd, typename BwdA, typename BwdB>
Var elementwise2(Var a, Var b, const char* op, Fwd fwd, BwdA bwd_a, BwdB bwd_b) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.shape() == bv.shape(), op,
          shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor out(av.shape());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = fwd(av[k], bv[k]);
  const std::size_t ia = a.id, ib = b.id;
  return g.emit(std::move(out), {a, b}, [ia, ib, bwd_a, bwd_b](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    const Tensor& x = g.value_of(ia);
    const Tensor& y = g.value_of(ib);
    if (g.needs_grad(ia)) {
      Tensor& da = g.grad_of(ia);
      for (std::size_t k = 0; k < dc.size(); ++k) da[k] += bwd_a(dc[k], x[k], y[k]);
    }
    if (g.needs_grad(ib)) {
      Tensor& db = g.grad_of(ib);
      for (std::size_t k = 0; k < dc.size(); ++k) db[k] += bwd_b(dc[k], x[k], y[k]);
    }
  }, op);
}

// Unary op whose derivative is expressed through its output y and input x.
template <typename Fwd, typename Deriv>
Var elementwise1(Var a, const char* op, Fwd fwd, Deriv deriv) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = fwd(av[k]);
  const std::size_t ia = a.id;
  return g.emit(std::move(out), {a}, [ia, deriv](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    const Tensor& x = g.value_of(ia);
    const Tensor& y = g.value_of(self);
    Tensor& da = g.grad_of(ia);
    for (std::size_t k = 0; k < dc.size(); ++k) da[k] += dc[k] * deriv(x[k], y[k]);
  }, op);
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(Var a, Var b) {
  return elementwise2(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double d, double, double) { return d; }, [](double d, double, double) { return d; });
}

Var sub(Var a, Var b) {
  return elementwise2(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double d, double, double) { return d; }, [](double d, double, double) { return -d; });
}

Var mul(Var a, Var b) {
  return elementwise2(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double d, double, double y) { return d * y; },
      [](double d, double x, double) { return d * x; });
}

Var scale(Var a, double factor) {
  return elementwise1(
      a, "scale", [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var sigmoid(Var a) {
  return elementwise1(a, "sigmoid", stable_sigmoid,
                      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return elementwise1(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return elementwise1(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var add_bias(Var a, Var bias) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  require_rank2(av, "add_bias");
  require(bv.size() == av.cols(), "add_bias", "bias length must equal column count");
  Tensor out = av;
  const std::size_t n = av.rows(), m = av.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bv[j];
  }
  const std::size_t ia = a.id, ib = bias.id;
  return g.emit(std::move(out), {a, bias}, [ia, ib, n, m](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    if (g.needs_grad(ia)) {
      Tensor& da = g.grad_of(ia);
      for (std::size_t k = 0; k < dc.size(); ++k) da[k] += dc[k];
    }
    if (g.needs_grad(ib)) {
      Tensor& db = g.grad_of(ib);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) db[j] += dc[i * m + j];
      }
    }
  }, "add_bias");
}

Var mul_col(Var a, Var s) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const Tensor& sv = s.value();
  require_rank2(av, "mul_col");
  require(sv.size() == av.rows(), "mul_col", "scale vector length must equal row count");
  const std::size_t n = av.rows(), m = av.cols();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = av[i * m + j] * sv[i];
  }
  const std::size_t ia = a.id, is = s.id;
  return g.emit(std::move(out), {a, s}, [ia, is, n, m](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    const Tensor& x = g.value_of(ia);
    const Tensor& sc = g.value_of(is);
    if (g.needs_grad(ia)) {
      Tensor& da = g.grad_of(ia);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) da[i * m + j] += dc[i * m + j] * sc[i];
      }
    }
    if (g.needs_grad(is)) {
      Tensor& ds = g.grad_of(is);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += dc[i * m + j] * x[i * m + j];
        ds[i] += acc;
      }
    }
  }, "mul_col");
}

Var softmax_rows(Var a) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const std::size_t n = av.rows(), m = av.cols();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, av[i * m + j]);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out[i * m + j] = std::exp(av[i * m + j] - mx);
      total += out[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= total;
  }
  const std::size_t ia = a.id;
  return g.emit(std::move(out), {a}, [ia, n, m](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    const Tensor& y = g.value_of(self);
    Tensor& da = g.grad_of(ia);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += dc[i * m + j] * y[i * m + j];
      for (std::size_t j = 0; j < m; ++j) da[i * m + j] += y[i * m + j] * (dc[i * m + j] - dot);
    }
  }, "softmax_rows");
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  const std::size_t n = av.rows(), m = av.cols();
  require(count > 0 && start + count <= m, "slice_cols", "range out of bounds");
  Tensor out({n, count});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(av.data() + i * m + start, count, out.data() + i * count);
  }
  const std::size_t ia = a.id;
  return g.emit(std::move(out), {a}, [ia, n, m, start, count](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    Tensor& da = g.grad_of(ia);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < count; ++j) da[i * m + start + j] += dc[i * count + j];
    }
  }, "slice_cols");
}

Var slice_rows(Var a, std::size_t start, std::size_t count) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require_rank2(av, "slice_rows");
  const std::size_t n = av.rows(), m = av.cols();
  require(count > 0 && start + count <= n, "slice_rows", "range out of bounds");
  Tensor out({count, m});
  std::copy_n(av.data() + start * m, count * m, out.data());
  const std::size_t ia = a.id;
  return g.emit(std::move(out), {a}, [ia, m, start, count](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    Tensor& da = g.grad_of(ia);
    for (std::size_t k = 0; k < count * m; ++k) da[start * m + k] += dc[k];
  }, "slice_rows");
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  Graph& g = *parts[0].graph;
  const std::size_t n = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require(p.value().rows() == n, "concat_cols", "row counts differ");
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out({n, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(pv.data() + i * widths[k], widths[k], out.data() + i * total + offset);
    }
    offset += widths[k];
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return g.emit(std::move(out), parts, [ids, widths, n, total](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.needs_grad(ids[k])) {
        Tensor& dp = g.grad_of(ids[k]);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < widths[k]; ++j) dp[i * widths[k] + j] += dc[i * total + offset + j];
        }
      }
      offset += widths[k];
    }
  }, "concat_cols");
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  Graph& g = *parts[0].graph;
  const std::size_t m = parts[0].value().cols();
  std::vector<std::size_t> heights;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require(p.value().cols() == m, "concat_rows", "column counts differ");
    heights.push_back(p.value().rows());
    total += heights.back();
  }
  Tensor out({total, m});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    std::copy_n(parts[k].value().data(), heights[k] * m, out.data() + offset * m);
    offset += heights[k];
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return g.emit(std::move(out), parts, [ids, heights, m](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.needs_grad(ids[k])) {
        Tensor& dp = g.grad_of(ids[k]);
        for (std::size_t q = 0; q < heights[k] * m; ++q) dp[q] += dc[offset * m + q];
      }
      offset += heights[k];
    }
  }, "concat_rows");
}

Var gather_rows(Var table, std::span<const int> rows) {
  Graph& g = *table.graph;
  const Tensor& tv = table.value();
  require_rank2(tv, "gather_rows");
  require(!rows.empty(), "gather_rows", "no rows requested");
  const std::size_t m = tv.cols();
  Tensor out({rows.size(), m});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && static_cast<std::size_t>(rows[i]) < tv.rows(), "gather_rows",
            "row index out of range");
    std::copy_n(tv.data() + static_cast<std::size_t>(rows[i]) * m, m, out.data() + i * m);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  const std::size_t it = table.id;
  return g.emit(std::move(out), {table}, [it, idx, m](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    Tensor& dt = g.grad_of(it);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < m; ++j) dt[static_cast<std::size_t>(idx[i]) * m + j] += dc[i * m + j];
    }
  }, "gather_rows");
}

Var reshape(Var a, Shape shape) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  out.reshape(std::move(shape));
  const std::size_t ia = a.id;
  return g.emit(std::move(out), {a}, [ia](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    Tensor& da = g.grad_of(ia);
    for (std::size_t k = 0; k < dc.size(); ++k) da[k] += dc[k];
  }, "reshape");
}

Var sum(Var a) {
  Graph& g = *a.graph;
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id;
  return g.emit(Tensor::vector({s}), {a}, [ia](Graph& g, std::size_t self) {
    const double d = g.grad_of(self)[0];
    Tensor& da = g.grad_of(ia);
    for (double& v : da.values()) v += d;
  }, "sum");
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var weighted_sum(Var a, const Tensor& weights) {
  Graph& g = *a.graph;
  const Tensor& av = a.value();
  require(weights.size() == av.size(), "weighted_sum", "weight count mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * weights[k];
  const std::size_t ia = a.id;
  return g.emit(Tensor::vector({s}), {a}, [ia, weights](Graph& g, std::size_t self) {
    const double d = g.grad_of(self)[0];
    Tensor& da = g.grad_of(ia);
    for (std::size_t k = 0; k < da.size(); ++k) da[k] += d * weights[k];
  }, "weighted_sum");
}

Var softmax_cross_entropy(Var logits, std::span<const int> targets) {
  Graph& g = *logits.graph;
  const Tensor& lv = logits.value();
  const std::size_t n = lv.rows(), m = lv.cols();
  require(targets.size() == n, "softmax_cross_entropy", "one target per row required");
  Tensor probs({n, m});
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    require(targets[i] >= 0 && static_cast<std::size_t>(targets[i]) < m, "softmax_cross_entropy",
            "target class out of range");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, lv[i * m + j]);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      probs[i * m + j] = std::exp(lv[i * m + j] - mx);
      total += probs[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) probs[i * m + j] /= total;
    loss -= lv[i * m + static_cast<std::size_t>(targets[i])] - mx - std::log(total);
  }
  loss /= static_cast<double>(n);
  std::vector<int> tgt(targets.begin(), targets.end());
  const std::size_t il = logits.id;
  return g.emit(Tensor::vector({loss}), {logits},
                [il, tgt, probs = std::move(probs), n, m](Graph& g, std::size_t self) {
                  const double d = g.grad_of(self)[0] / static_cast<double>(n);
                  Tensor& dl = g.grad_of(il);
                  for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < m; ++j) {
                      const double onehot = static_cast<int>(j) == tgt[i] ? 1.0 : 0.0;
                      dl[i * m + j] += d * (probs[i * m + j] - onehot);
                    }
                  }
                },
                "softmax_cross_entropy");
}

Var sigmoid_cross_entropy(Var logits, std::span<const double> labels) {
  Graph& g = *logits.graph;
  const Tensor& lv = logits.value();
  require(labels.size() == lv.size(), "sigmoid_cross_entropy", "one label per logit required");
  double loss = 0.0;
  for (std::size_t k = 0; k < lv.size(); ++k) {
    const double x = lv[k];
    loss += std::max(x, 0.0) - x * labels[k] + std::log1p(std::exp(-std::abs(x)));
  }
  const std::size_t n = lv.size();
  loss /= static_cast<double>(n);
  std::vector<double> y(labels.begin(), labels.end());
  const std::size_t il = logits.id;
  return g.emit(Tensor::vector({loss}), {logits}, [il, y, n](Graph& g, std::size_t self) {
    const double d = g.grad_of(self)[0] / static_cast<double>(n);
    const Tensor& x = g.value_of(il);
    Tensor& dl = g.grad_of(il);
    for (std::size_t k = 0; k < n; ++k) dl[k] += d * (stable_sigmoid(x[k]) - y[k]);
  }, "sigmoid_cross_entropy");
}

Var quad_form_rows(Var d, const Eigen::MatrixXd& metric) {
  Graph& g = *d.graph;
  const Tensor& dv = d.value();
  require_rank2(dv, "quad_form_rows");
  require(metric.rows() == static_cast<Eigen::Index>(dv.cols()) && metric.cols() == metric.rows(),
          "quad_form_rows", "metric dimension must equal row width");
  const std::size_t n = dv.rows();
  RowMatrix ad = dv.mat() * metric.transpose();  // row i: (A d_i)^T
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) out[i] = dv.mat().row(static_cast<Eigen::Index>(i)).dot(ad.row(static_cast<Eigen::Index>(i)));
  // d/dd_i of d_i^T A d_i = (A + A^T) d_i
  RowMatrix sym_grad = dv.mat() * (metric + metric.transpose()).transpose();
  const std::size_t id = d.id;
  return g.emit(std::move(out), {d}, [id, sym_grad = std::move(sym_grad), n](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    Tensor& dd = g.grad_of(id);
    auto dm = dd.mat();
    for (std::size_t i = 0; i < n; ++i) dm.row(static_cast<Eigen::Index>(i)) += dc[i] * sym_grad.row(static_cast<Eigen::Index>(i));
  }, "quad_form_rows");
}

namespace {

// Rows: (c, ky, kx); columns: output pixel (y, x).
RowMatrix im2col(const Tensor& x, std::size_t k) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const long pad = static_cast<long>(k / 2);
  RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(c * k * k), static_cast<Eigen::Index>(h * w));
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* row = cols.data() + ((ch * k + ky) * k + kx) * h * w;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + static_cast<long>(ky) - pad;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          const double* src = x.data() + (ch * h + static_cast<std::size_t>(sy)) * w;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sx = static_cast<long>(xx) + static_cast<long>(kx) - pad;
            if (sx < 0 || sx >= static_cast<long>(w)) continue;
            row[y * w + xx] = src[sx];
          }
        }
      }
    }
  }
  return cols;
}

void col2im_add(const RowMatrix& cols, std::size_t c, std::size_t h, std::size_t w, std::size_t k,
                Tensor& dx) {
  const long pad = static_cast<long>(k / 2);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double* row = cols.data() + ((ch * k + ky) * k + kx) * h * w;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + static_cast<long>(ky) - pad;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          double* dst = dx.data() + (ch * h + static_cast<std::size_t>(sy)) * w;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sx = static_cast<long>(xx) + static_cast<long>(kx) - pad;
            if (sx < 0 || sx >= static_cast<long>(w)) continue;
            dst[sx] += row[y * w + xx];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var x, Var w, Var b) {
  Graph& g = *x.graph;
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  require(xv.rank() == 3, "conv2d", "input must be [C,H,W]");
  require(wv.rank() == 4 && wv.dim(2) == wv.dim(3) && wv.dim(2) % 2 == 1, "conv2d",
          "kernel must be [F,C,k,k] with odd k");
  require(wv.dim(1) == xv.dim(0), "conv2d", "kernel channel count must match input");
  require(bv.size() == wv.dim(0), "conv2d", "one bias per filter required");
  const std::size_t c = xv.dim(0), h = xv.dim(1), wd = xv.dim(2);
  const std::size_t f = wv.dim(0), k = wv.dim(2);
  RowMatrix cols = im2col(xv, k);
  ConstMatrixMap wmat(wv.data(), static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c * k * k));
  Tensor out({f, h, wd});
  MatrixMap om(out.data(), static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(h * wd));
  om.noalias() = wmat * cols;
  for (std::size_t fi = 0; fi < f; ++fi) om.row(static_cast<Eigen::Index>(fi)).array() += bv[fi];
  const std::size_t ix = x.id, iw = w.id, ib = b.id;
  return g.emit(std::move(out), {x, w, b},
                [ix, iw, ib, cols = std::move(cols), c, h, wd, f, k](Graph& g, std::size_t self) {
                  const Tensor& dc = g.grad_of(self);
                  ConstMatrixMap dom(dc.data(), static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(h * wd));
                  if (g.needs_grad(iw)) {
                    Tensor& dw = g.grad_of(iw);
                    MatrixMap dwm(dw.data(), static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c * k * k));
                    dwm.noalias() += dom * cols.transpose();
                  }
                  if (g.needs_grad(ib)) {
                    Tensor& db = g.grad_of(ib);
                    for (std::size_t fi = 0; fi < f; ++fi) db[fi] += dom.row(static_cast<Eigen::Index>(fi)).sum();
                  }
                  if (g.needs_grad(ix)) {
                    const Tensor& wv = g.value_of(iw);
                    ConstMatrixMap wmat(wv.data(), static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c * k * k));
                    RowMatrix dcols = wmat.transpose() * dom;
                    col2im_add(dcols, c, h, wd, k, g.grad_of(ix));
                  }
                },
                "conv2d");
}

Var max_pool2d(Var x, std::size_t size) {
  Graph& g = *x.graph;
  const Tensor& xv = x.value();
  require(xv.rank() == 3, "max_pool2d", "input must be [C,H,W]");
  require(size >= 1 && xv.dim(1) >= size && xv.dim(2) >= size, "max_pool2d", "window larger than input");
  const std::size_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  const std::size_t oh = h / size, ow = w / size;
  Tensor out({c, oh, ow});
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        std::size_t best = (ch * h + y * size) * w + xx * size;
        for (std::size_t dy = 0; dy < size; ++dy) {
          for (std::size_t dx = 0; dx < size; ++dx) {
            const std::size_t idx = (ch * h + y * size + dy) * w + xx * size + dx;
            if (xv[idx] > xv[best]) best = idx;
          }
        }
        const std::size_t o = (ch * oh + y) * ow + xx;
        out[o] = xv[best];
        argmax[o] = best;
      }
    }
  }
  const std::size_t ix = x.id;
  return g.emit(std::move(out), {x}, [ix, argmax = std::move(argmax)](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_of(self);
    Tensor& dx = g.grad_of(ix);
    for (std::size_t o = 0; o < dc.size(); ++o) dx[argmax[o]] += dc[o];
  }, "max_pool2d");
}

}  // namespace pronlearn::nn
