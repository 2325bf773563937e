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

#include "pronlearn/nn/layers.hpp"

#include <cmath>

#include "pronlearn/errors.hpp"

namespace pronlearn::nn {

Dense::Dense(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
             Rng& rng)
    : weight_(&params.add_uniform(name + ".weight", {out, in}, in, out, rng)),
      bias_(&params.add_zeros(name + ".bias", {out})) {}

Dense Dense::bind(ParameterSet& params, const std::string& name) {
  Dense d;
  d.weight_ = &params.get(name + ".weight");
  d.bias_ = &params.get(name + ".bias");
  return d;
}

Var Dense::operator()(Graph& g, Var x) const {
  return add_bias(matmul_bt(x, g.param(*weight_)), g.param(*bias_));
}

std::size_t Dense::in_dim() const { return weight_->value.dim(1); }
std::size_t Dense::out_dim() const { return weight_->value.dim(0); }

LstmCell::LstmCell(ParameterSet& params, const std::string& name, std::size_t in,
                   std::size_t hidden, Rng& rng)
    : w_input_(&params.add_uniform(name + ".w_input", {4 * hidden, in}, in, hidden, rng)),
      w_hidden_(&params.add_uniform(name + ".w_hidden", {4 * hidden, hidden}, hidden, hidden, rng)),
      bias_(&params.add_zeros(name + ".bias", {4 * hidden})),
      hidden_(hidden) {}

LstmCell LstmCell::bind(ParameterSet& params, const std::string& name) {
  LstmCell cell;
  cell.w_input_ = &params.get(name + ".w_input");
  cell.w_hidden_ = &params.get(name + ".w_hidden");
  cell.bias_ = &params.get(name + ".bias");
  cell.hidden_ = cell.w_hidden_->value.dim(1);
  return cell;
}

std::size_t LstmCell::input_dim() const { return w_input_->value.dim(1); }

LstmState LstmCell::zero_state(Graph& g, std::size_t batch) const {
  return {g.constant(Tensor({batch, hidden_})), g.constant(Tensor({batch, hidden_}))};
}

LstmState LstmCell::step(Graph& g, Var x, const LstmState& state) const {
  Var gates = add_bias(add(matmul_bt(x, g.param(*w_input_)), matmul_bt(state.h, g.param(*w_hidden_))),
                       g.param(*bias_));
  Var i = sigmoid(slice_cols(gates, 0, hidden_));
  Var f = sigmoid(slice_cols(gates, hidden_, hidden_));
  Var cand = tanh(slice_cols(gates, 2 * hidden_, hidden_));
  Var o = sigmoid(slice_cols(gates, 3 * hidden_, hidden_));
  Var c = add(mul(f, state.c), mul(i, cand));
  Var h = mul(o, tanh(c));
  return {h, c};
}

MultiHeadAttention::MultiHeadAttention(ParameterSet& params, const std::string& name,
                                       std::size_t width, std::size_t heads, Rng& rng)
    : q_(params, name + ".query", width, width, rng),
      k_(params, name + ".key", width, width, rng),
      v_(params, name + ".value", width, width, rng),
      o_(params, name + ".out", width, width, rng),
      heads_(heads),
      width_(width) {
  if (heads == 0 || width % heads != 0) {
    throw InvalidArgument("attention width must be divisible by the head count");
  }
}

MultiHeadAttention MultiHeadAttention::bind(ParameterSet& params, const std::string& name,
                                            std::size_t heads) {
  MultiHeadAttention a;
  a.q_ = Dense::bind(params, name + ".query");
  a.k_ = Dense::bind(params, name + ".key");
  a.v_ = Dense::bind(params, name + ".value");
  a.o_ = Dense::bind(params, name + ".out");
  a.heads_ = heads;
  a.width_ = a.q_.out_dim();
  if (heads == 0 || a.width_ % heads != 0) {
    throw InvalidArgument("attention width must be divisible by the head count");
  }
  return a;
}

Var MultiHeadAttention::operator()(Graph& g, Var query, Var memory,
                                   std::vector<Var>* weights_out) const {
  Var q = q_(g, query);
  Var k = k_(g, memory);
  Var v = v_(g, memory);
  const std::size_t dh = width_ / heads_;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outputs;
  outputs.reserve(heads_);
  if (weights_out) weights_out->clear();
  for (std::size_t h = 0; h < heads_; ++h) {
    Var qh = slice_cols(q, h * dh, dh);
    Var kh = slice_cols(k, h * dh, dh);
    Var vh = slice_cols(v, h * dh, dh);
    Var weights = softmax_rows(scale(matmul_bt(qh, kh), inv_sqrt));
    if (weights_out) weights_out->push_back(weights);
    outputs.push_back(matmul(weights, vh));
  }
  return o_(g, heads_ == 1 ? outputs[0] : concat_cols(outputs));
}

Conv2d::Conv2d(ParameterSet& params, const std::string& name, std::size_t in_channels,
               std::size_t filters, std::size_t kernel, Rng& rng)
    : weight_(&params.add_uniform(name + ".weight", {filters, in_channels, kernel, kernel},
                                  in_channels * kernel * kernel, filters * kernel * kernel, rng)),
      bias_(&params.add_zeros(name + ".bias", {filters})) {}

Conv2d Conv2d::bind(ParameterSet& params, const std::string& name) {
  Conv2d c;
  c.weight_ = &params.get(name + ".weight");
  c.bias_ = &params.get(name + ".bias");
  return c;
}

Var Conv2d::operator()(Graph& g, Var x) const {
  return conv2d(x, g.param(*weight_), g.param(*bias_));
}

}  // namespace pronlearn::nn
