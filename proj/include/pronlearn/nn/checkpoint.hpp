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

#ifndef PRONLEARN_NN_CHECKPOINT_HPP_
#define PRONLEARN_NN_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pronlearn/nn/parameters.hpp"
#include "pronlearn/nn/tensor.hpp"

namespace pronlearn::nn {

// Binary layout (all integers little-endian):
//   8 bytes   magic "PLNNCKPT"
//   u32       format version (1)
//   u64 + N   metadata (UTF-8, usually JSON)
//   u64       tensor count
//   per tensor: u32 name length, name bytes, u32 rank, u64 dims[rank],
//               IEEE-754 binary64 values, little-endian, row-major
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(std::string_view name) const;
  bool contains(std::string_view name) const;
  bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Appends every parameter value of `params` under `prefix` + name.
void append_parameters(Checkpoint& ckpt, const ParameterSet& params, const std::string& prefix = "");
// Creates parameters from all tensors whose name starts with `prefix`.
void load_parameters(const Checkpoint& ckpt, ParameterSet& params, const std::string& prefix = "");

}  // namespace pronlearn::nn

#endif  // PRONLEARN_NN_CHECKPOINT_HPP_
