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

#include "pronlearn/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "pronlearn/errors.hpp"
#include "pronlearn/nn/layers.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn::nn {

GradCheckResult grad_check(ParameterSet& params, const std::function<Var(Graph&)>& loss,
                           double eps, double kink_tolerance) {
  params.zero_grad();
  {
    Graph g;
    Var out = loss(g);
    g.backward(out);
  }
  auto evaluate = [&]() {
    Graph g(false);
    return loss(g).value()[0];
  };
  const double center = evaluate();
  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Parameter& param = params[p];
    for (std::size_t k = 0; k < param.value.size(); ++k) {
      const double saved = param.value[k];
      param.value[k] = saved + eps;
      const double up = evaluate();
      param.value[k] = saved - eps;
      const double down = evaluate();
      param.value[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = param.grad[k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      // Across a kink the one-sided slopes differ by at least as much as the
      // analytic gradient differs from their average.
      const double forward = (up - center) / eps;
      const double backward = (center - down) / eps;
      if (kink_tolerance > 0.0 && rel > kink_tolerance &&
          std::abs(forward - backward) >= std::abs(analytic - numeric)) {
        ++result.kinks;
        continue;
      }
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = param.name + "[" + std::to_string(k) + "]";
      }
    }
  }
  return result;
}

std::vector<Primitive> all_primitives() {
  return {Primitive::kDense,   Primitive::kLstmCell,     Primitive::kMultiHeadAttention,
          Primitive::kConv2d,  Primitive::kMaxPool,      Primitive::kRelu,
          Primitive::kSigmoid, Primitive::kTanh,         Primitive::kSoftmax,
          Primitive::kCrossEntropy, Primitive::kSigmoidCrossEntropy, Primitive::kMean,
          Primitive::kConcat,  Primitive::kFlatten,      Primitive::kGather,
          Primitive::kQuadForm};
}

std::string primitive_name(Primitive p) {
  switch (p) {
    case Primitive::kDense: return "dense";
    case Primitive::kLstmCell: return "lstm_cell";
    case Primitive::kMultiHeadAttention: return "multi_head_attention";
    case Primitive::kConv2d: return "conv2d";
    case Primitive::kMaxPool: return "max_pool";
    case Primitive::kRelu: return "relu";
    case Primitive::kSigmoid: return "sigmoid";
    case Primitive::kTanh: return "tanh";
    case Primitive::kSoftmax: return "softmax";
    case Primitive::kCrossEntropy: return "cross_entropy";
    case Primitive::kSigmoidCrossEntropy: return "sigmoid_cross_entropy";
    case Primitive::kMean: return "mean";
    case Primitive::kConcat: return "concat";
    case Primitive::kFlatten: return "flatten";
    case Primitive::kGather: return "gather";
    case Primitive::kQuadForm: return "quad_form";
  }
  return "unknown";
}

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero so a kink never sits inside [x - eps, x + eps].
Tensor away_from_zero(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.1, 1.0);
  return t;
}

// Distinct values on a coarse grid so pooling maxima never tie under perturbation.
Tensor well_separated(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  std::vector<double> grid(t.size());
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = 0.1 * static_cast<double>(k);
  rng.shuffle(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) t[k] = grid[k] - 0.05 * grid.size() + rng.uniform(-0.01, 0.01);
  return t;
}

}  // namespace

GradCheckResult grad_check_primitive(Primitive p, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
  ParameterSet params;
  std::function<Var(Graph&)> build;

  auto weights_for = [&rng](const Shape& s) { return random_tensor(s, rng, 0.5, 1.5); };

  switch (p) {
    case Primitive::kDense: {
      auto& x = params.add("x", random_tensor({3, 4}, rng));
      Dense dense(params, "dense", 4, 3, rng);
      for (double& v : params.get("dense.bias").value.values()) v = rng.uniform(-0.5, 0.5);
      Tensor w = weights_for({3, 3});
      build = [&x, dense, w](Graph& g) { return weighted_sum(dense(g, g.param(x)), w); };
      break;
    }
    case Primitive::kLstmCell: {
      const std::size_t steps = 5, batch = 2, in = 4, hidden = 8;
      auto& xs = params.add("x", random_tensor({steps * batch, in}, rng));
      LstmCell cell(params, "lstm", in, hidden, rng);
      for (double& v : params.get("lstm.bias").value.values()) v = rng.uniform(-0.5, 0.5);
      Tensor wh = weights_for({batch, hidden});
      Tensor wc = weights_for({batch, hidden});
      build = [&xs, cell, wh, wc, steps, batch](Graph& g) {
        Var x = g.param(xs);
        LstmState s = cell.zero_state(g, batch);
        for (std::size_t t = 0; t < steps; ++t) s = cell.step(g, slice_rows(x, t * batch, batch), s);
        return add(weighted_sum(s.h, wh), weighted_sum(s.c, wc));
      };
      break;
    }
    case Primitive::kMultiHeadAttention: {
      auto& q = params.add("query", random_tensor({3, 8}, rng));
      auto& m = params.add("memory", random_tensor({4, 8}, rng));
      MultiHeadAttention attn(params, "attn", 8, 2, rng);
      Tensor w = weights_for({3, 8});
      build = [&q, &m, attn, w](Graph& g) { return weighted_sum(attn(g, g.param(q), g.param(m)), w); };
      break;
    }
    case Primitive::kConv2d: {
      auto& x = params.add("x", random_tensor({2, 5, 6}, rng));
      Conv2d conv(params, "conv", 2, 1, 3, rng);
      for (double& v : params.get("conv.bias").value.values()) v = rng.uniform(-0.5, 0.5);
      Tensor w = weights_for({1, 5, 6});
      build = [&x, conv, w](Graph& g) { return weighted_sum(conv(g, g.param(x)), w); };
      break;
    }
    case Primitive::kMaxPool: {
      auto& x = params.add("x", well_separated({2, 4, 6}, rng));
      Tensor w = weights_for({2, 2, 3});
      build = [&x, w](Graph& g) { return weighted_sum(max_pool2d(g.param(x), 2), w); };
      break;
    }
    case Primitive::kRelu: {
      auto& x = params.add("x", away_from_zero({4, 5}, rng));
      Tensor w = weights_for({4, 5});
      build = [&x, w](Graph& g) { return weighted_sum(relu(g.param(x)), w); };
      break;
    }
    case Primitive::kSigmoid: {
      auto& x = params.add("x", random_tensor({4, 5}, rng, -3.0, 3.0));
      Tensor w = weights_for({4, 5});
      build = [&x, w](Graph& g) { return weighted_sum(sigmoid(g.param(x)), w); };
      break;
    }
    case Primitive::kTanh: {
      auto& x = params.add("x", random_tensor({4, 5}, rng, -2.0, 2.0));
      Tensor w = weights_for({4, 5});
      build = [&x, w](Graph& g) { return weighted_sum(tanh(g.param(x)), w); };
      break;
    }
    case Primitive::kSoftmax: {
      auto& x = params.add("x", random_tensor({3, 5}, rng, -2.0, 2.0));
      Tensor w = random_tensor({3, 5}, rng, -1.0, 1.0);
      build = [&x, w](Graph& g) { return weighted_sum(softmax_rows(g.param(x)), w); };
      break;
    }
    case Primitive::kCrossEntropy: {
      auto& x = params.add("x", random_tensor({4, 6}, rng, -2.0, 2.0));
      std::vector<int> targets(4);
      for (int& t : targets) t = static_cast<int>(rng.index(6));
      build = [&x, targets](Graph& g) { return softmax_cross_entropy(g.param(x), targets); };
      break;
    }
    case Primitive::kSigmoidCrossEntropy: {
      auto& x = params.add("x", random_tensor({6}, rng, -3.0, 3.0));
      std::vector<double> labels(6);
      for (double& y : labels) y = rng.bernoulli(0.5) ? 1.0 : 0.0;
      build = [&x, labels](Graph& g) { return sigmoid_cross_entropy(g.param(x), labels); };
      break;
    }
    case Primitive::kMean: {
      auto& x = params.add("x", random_tensor({3, 4}, rng));
      build = [&x](Graph& g) { return mean(mul(g.param(x), g.param(x))); };
      break;
    }
    case Primitive::kConcat: {
      auto& a = params.add("a", random_tensor({3, 2}, rng));
      auto& b = params.add("b", random_tensor({3, 4}, rng));
      Tensor wc = weights_for({3, 6});
      Tensor wr = weights_for({6, 2});
      build = [&a, &b, wc, wr](Graph& g) {
        std::vector<Var> cols{g.param(a), g.param(b)};
        std::vector<Var> rows{g.param(a), slice_cols(g.param(b), 1, 2)};
        return add(weighted_sum(tanh(concat_cols(cols)), wc), weighted_sum(tanh(concat_rows(rows)), wr));
      };
      break;
    }
    case Primitive::kFlatten: {
      auto& x = params.add("x", random_tensor({2, 3, 4}, rng));
      Tensor w = weights_for({1, 24});
      build = [&x, w](Graph& g) { return weighted_sum(tanh(reshape(g.param(x), {1, 24})), w); };
      break;
    }
    case Primitive::kGather: {
      auto& table = params.add("table", random_tensor({5, 3}, rng));
      std::vector<int> rows{4, 0, 4, 2};
      Tensor w = weights_for({4, 3});
      build = [&table, rows, w](Graph& g) { return weighted_sum(tanh(gather_rows(g.param(table), rows)), w); };
      break;
    }
    case Primitive::kQuadForm: {
      auto& d = params.add("d", random_tensor({4, 3}, rng));
      Eigen::MatrixXd root = Eigen::MatrixXd::NullaryExpr(3, 3, [&rng]() { return rng.uniform(-1.0, 1.0); });
      Eigen::MatrixXd metric = root.transpose() * root + Eigen::MatrixXd::Identity(3, 3);
      Tensor w = weights_for({4});
      build = [&d, metric, w](Graph& g) { return weighted_sum(quad_form_rows(g.param(d), metric), w); };
      break;
    }
  }
  return grad_check(params, build);
}

}  // namespace pronlearn::nn
