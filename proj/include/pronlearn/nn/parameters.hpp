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

#ifndef PRONLEARN_NN_PARAMETERS_HPP_
#define PRONLEARN_NN_PARAMETERS_HPP_

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pronlearn/nn/tensor.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn::nn {

// A trainable tensor with its gradient accumulator and optimizer state.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor moment1;  // momentum velocity (SGD) or first moment (Adam)
  Tensor moment2;  // second moment (Adam)

  Parameter(std::string n, Tensor v);
  void zero_grad() { grad.fill(0.0); }
};

// Named parameters with stable addresses. Iteration order is insertion order.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;

  Parameter& add(std::string name, Tensor value);
  // Glorot-style uniform(-s, s), s = sqrt(6 / (fan_in + fan_out)).
  Parameter& add_uniform(std::string name, Shape shape, std::size_t fan_in,
                         std::size_t fan_out, Rng& rng);
  Parameter& add_zeros(std::string name, Shape shape);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  void reset_optimizer_state();
  // Copies values (not gradients or optimizer state) from a same-layout set.
  void copy_values_from(const ParameterSet& other);
  double grad_norm() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

// Plain SGD with optional momentum.
struct Sgd {
  double learning_rate = 1e-3;
  double momentum = 0.0;

  void step(ParameterSet& params) const;
};

struct Adam {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;

  void step(ParameterSet& params);
};

}  // namespace pronlearn::nn

#endif  // PRONLEARN_NN_PARAMETERS_HPP_
