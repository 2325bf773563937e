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

#include "pronlearn/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "../io_util.hpp"
#include "pronlearn/errors.hpp"

namespace pronlearn::nn {
namespace {

constexpr char kMagic[8] = {'P', 'L', 'N', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor& Checkpoint::tensor(std::string_view name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw InvalidArgument("checkpoint has no tensor '" + std::string(name) + "'");
}

bool Checkpoint::contains(std::string_view name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return true;
  }
  return false;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, Checkpoint::kVersion);
  put_le<std::uint64_t>(out, ckpt.metadata.size());
  out += ckpt.metadata;
  put_le<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw IoError("not a checkpoint file (bad magic)");
  }
  const auto version = in.get_le<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.metadata = std::string(in.take(in.get_le<std::uint64_t>()));
  const auto count = in.get_le<std::uint64_t>();
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name(in.take(in.get_le<std::uint32_t>()));
    const auto rank = in.get_le<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(in.get_le<std::uint64_t>());
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = std::bit_cast<double>(in.get_le<std::uint64_t>());
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!in.done()) throw IoError("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  detail::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

void append_parameters(Checkpoint& ckpt, const ParameterSet& params, const std::string& prefix) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.tensors.emplace_back(prefix + params[i].name, params[i].value);
  }
}

void load_parameters(const Checkpoint& ckpt, ParameterSet& params, const std::string& prefix) {
  for (const auto& [name, t] : ckpt.tensors) {
    if (name.compare(0, prefix.size(), prefix) == 0) params.add(name.substr(prefix.size()), t);
  }
}

}  // namespace pronlearn::nn
