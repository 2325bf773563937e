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

#ifndef PRONLEARN_NN_GRADCHECK_HPP_
#define PRONLEARN_NN_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pronlearn/nn/graph.hpp"
#include "pronlearn/nn/parameters.hpp"

namespace pronlearn::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
  std::size_t kinks = 0;  // coordinates skipped as non-differentiable points
};

// Compares reverse-mode gradients of the scalar built by `loss` against
// central differences with step `eps`, over every scalar of every parameter.
// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// With a positive kink_tolerance, a coordinate whose error exceeds it and whose
// one-sided slopes disagree by at least the analytic gap lands in `kinks`.
GradCheckResult grad_check(ParameterSet& params, const std::function<Var(Graph&)>& loss,
                           double eps = 1e-4, double kink_tolerance = 0.0);

enum class Primitive {
  kDense,
  kLstmCell,
  kMultiHeadAttention,
  kConv2d,
  kMaxPool,
  kRelu,
  kSigmoid,
  kTanh,
  kSoftmax,
  kCrossEntropy,
  kSigmoidCrossEntropy,
  kMean,
  kConcat,
  kFlatten,
  kGather,
  kQuadForm,
};

std::vector<Primitive> all_primitives();
std::string primitive_name(Primitive p);

// Seeded gradient check of one primitive on a small random instance.
GradCheckResult grad_check_primitive(Primitive p, std::uint64_t seed);

}  // namespace pronlearn::nn

#endif  // PRONLEARN_NN_GRADCHECK_HPP_
