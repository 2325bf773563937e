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

#ifndef PRONLEARN_NN_LAYERS_HPP_
#define PRONLEARN_NN_LAYERS_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pronlearn/nn/graph.hpp"
#include "pronlearn/nn/parameters.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn::nn {

// y = x W^T + b, W: [out, in].
class Dense {
 public:
  Dense() = default;
  Dense(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  // Rebinds to parameters that already exist in `params` (after loading).
  static Dense bind(ParameterSet& params, const std::string& name);

  Var operator()(Graph& g, Var x) const;
  std::size_t in_dim() const;
  std::size_t out_dim() const;

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
};

struct LstmState {
  Var h;
  Var c;
};

// Unidirectional LSTM cell over a batch: x [B, in], h/c [B, H].
// Gate order in the stacked weights is input, forget, cell, output.
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterSet& params, const std::string& name, std::size_t in, std::size_t hidden,
           Rng& rng);
  static LstmCell bind(ParameterSet& params, const std::string& name);

  LstmState step(Graph& g, Var x, const LstmState& state) const;
  LstmState zero_state(Graph& g, std::size_t batch) const;
  std::size_t hidden() const { return hidden_; }
  std::size_t input_dim() const;

 private:
  Parameter* w_input_ = nullptr;   // [4H, in]
  Parameter* w_hidden_ = nullptr;  // [4H, H]
  Parameter* bias_ = nullptr;      // [4H]
  std::size_t hidden_ = 0;
};

// Scaled dot-product attention with `heads` heads over model width D.
// query [nq, D], memory [nk, D] -> [nq, D]. The per-head attention weights of
// the last call can be captured through `weights_out`.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet& params, const std::string& name, std::size_t width,
                     std::size_t heads, Rng& rng);
  static MultiHeadAttention bind(ParameterSet& params, const std::string& name, std::size_t heads);

  Var operator()(Graph& g, Var query, Var memory, std::vector<Var>* weights_out = nullptr) const;
  std::size_t heads() const { return heads_; }

 private:
  Dense q_, k_, v_, o_;
  std::size_t heads_ = 1;
  std::size_t width_ = 0;
};

// Convolution layer with "same" padding and stride 1.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterSet& params, const std::string& name, std::size_t in_channels,
         std::size_t filters, std::size_t kernel, Rng& rng);
  static Conv2d bind(ParameterSet& params, const std::string& name);

  Var operator()(Graph& g, Var x) const;

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
};

}  // namespace pronlearn::nn

#endif  // PRONLEARN_NN_LAYERS_HPP_
