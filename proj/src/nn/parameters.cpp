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

#include "pronlearn/nn/parameters.hpp"

#include <cmath>

#include "pronlearn/errors.hpp"

namespace pronlearn::nn {

Parameter::Parameter(std::string n, Tensor v)
    : name(std::move(n)),
      value(std::move(v)),
      grad(Tensor::zeros_like(value)),
      moment1(Tensor::zeros_like(value)),
      moment2(Tensor::zeros_like(value)) {}

Parameter& ParameterSet::add(std::string name, Tensor value) {
  if (index_.count(name)) throw InvalidArgument("duplicate parameter '" + name + "'");
  index_.emplace(name, params_.size());
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value)));
  return *params_.back();
}

Parameter& ParameterSet::add_uniform(std::string name, Shape shape, std::size_t fan_in,
                                     std::size_t fan_out, Rng& rng) {
  Tensor t(std::move(shape));
  const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.values()) v = rng.uniform(-s, s);
  return add(std::move(name), std::move(t));
}

Parameter& ParameterSet::add_zeros(std::string name, Shape shape) {
  return add(std::move(name), Tensor(std::move(shape)));
}

Parameter& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return *params_[it->second];
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

void ParameterSet::reset_optimizer_state() {
  for (auto& p : params_) {
    p->moment1.fill(0.0);
    p->moment2.fill(0.0);
  }
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  for (auto& p : params_) {
    const Parameter& src = other.get(p->name);
    if (src.value.shape() != p->value.shape()) {
      throw InvalidArgument("shape mismatch for parameter '" + p->name + "'");
    }
    p->value = src.value;
  }
}

double ParameterSet::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    for (double g : p->grad.values()) s += g * g;
  }
  return std::sqrt(s);
}

void Sgd::step(ParameterSet& params) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    auto value = p.value.values();
    auto grad = p.grad.values();
    if (momentum == 0.0) {
      for (std::size_t k = 0; k < value.size(); ++k) value[k] -= learning_rate * grad[k];
    } else {
      auto vel = p.moment1.values();
      for (std::size_t k = 0; k < value.size(); ++k) {
        vel[k] = momentum * vel[k] + grad[k];
        value[k] -= learning_rate * vel[k];
      }
    }
  }
}

void Adam::step(ParameterSet& params) {
  ++step_count;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    auto value = p.value.values();
    auto grad = p.grad.values();
    auto m = p.moment1.values();
    auto v = p.moment2.values();
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
      value[k] -= learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + epsilon);
    }
  }
}

}  // namespace pronlearn::nn
