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

#ifndef PRONLEARN_NN_GRAPH_HPP_
#define PRONLEARN_NN_GRAPH_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "pronlearn/nn/parameters.hpp"
#include "pronlearn/nn/tensor.hpp"

namespace pronlearn::nn {

class Graph;

// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const;
};

// Tape for reverse-mode differentiation. Nodes are appended in evaluation
// order; backward() walks them in reverse. A graph built with
// `record = false` evaluates values only and keeps no closures.
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }

  Var constant(Tensor value);
  // Leaf whose gradient is kept in the graph (read back with grad()).
  Var variable(Tensor value);
  // Leaf bound to a parameter; gradients accumulate into Parameter::grad.
  // Repeated calls for one parameter return the same node.
  Var param(Parameter& p);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(out)/d(out) = 1 for a single-element output and propagates.
  void backward(Var out);

  // Building blocks for primitives.
  using Backward = std::function<void(Graph&, std::size_t self)>;
  Var emit(Tensor value, std::initializer_list<Var> inputs, Backward backward,
           const char* op_name);
  Var emit(Tensor value, std::span<const Var> inputs, Backward backward, const char* op_name);
  Tensor& grad_of(std::size_t id);        // allocates zeros on first use
  const Tensor& value_of(std::size_t id) const;
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    Backward backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// ---- Primitives -----------------------------------------------------------
// Shapes: matrices are [rows x cols]; vectors are rank 1.

Var matmul(Var a, Var b);                    // [n,k]x[k,m] -> [n,m]
Var matmul_bt(Var a, Var b);                 // [n,k]x[m,k]^T -> [n,m]
Var transpose(Var a);                        // [n,m] -> [m,n]
Var add(Var a, Var b);                       // same shape
Var sub(Var a, Var b);
Var mul(Var a, Var b);                       // elementwise
Var add_bias(Var a, Var bias);               // [n,m] + [m]
Var mul_col(Var a, Var s);                   // [n,m] * [n,1] broadcast across columns
Var scale(Var a, double factor);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var softmax_rows(Var a);                     // row-wise softmax of [n,m]
Var slice_cols(Var a, std::size_t start, std::size_t count);
Var slice_rows(Var a, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(Var table, std::span<const int> rows);  // [V,E] -> [n,E]
Var reshape(Var a, Shape shape);
Var sum(Var a);                              // -> [1]
Var mean(Var a);                             // -> [1]
Var weighted_sum(Var a, const Tensor& weights);  // sum(a * weights) -> [1]
// Mean over rows of -log softmax(logits)[target].
Var softmax_cross_entropy(Var logits, std::span<const int> targets);
// Mean binary cross-entropy of sigmoid(logits) against labels in {0,1}.
Var sigmoid_cross_entropy(Var logits, std::span<const double> labels);
// Per-row quadratic form d_i^T A d_i for a constant symmetric A: [n,D] -> [n].
Var quad_form_rows(Var d, const Eigen::MatrixXd& metric);
// 2-D convolution, stride 1, zero "same" padding (odd kernel):
// x [C,H,W], w [F,C,k,k], b [F] -> [F,H,W].
Var conv2d(Var x, Var w, Var b);
// Non-overlapping max pooling with window `size`: [C,H,W] -> [C,H/size,W/size].
Var max_pool2d(Var x, std::size_t size);

}  // namespace pronlearn::nn

#endif  // PRONLEARN_NN_GRAPH_HPP_
