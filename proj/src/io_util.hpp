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

#ifndef PRONLEARN_SRC_IO_UTIL_HPP_
#define PRONLEARN_SRC_IO_UTIL_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pronlearn::detail {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_whitespace(std::string_view text);
std::vector<std::string_view> split_char(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace pronlearn::detail

#endif  // PRONLEARN_SRC_IO_UTIL_HPP_
