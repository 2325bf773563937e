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

#ifndef PRONLEARN_SRC_JSON_UTIL_HPP_
#define PRONLEARN_SRC_JSON_UTIL_HPP_

#include "json.hpp"
#include "pronlearn/engagement.hpp"

namespace pronlearn::detail {

using Json = nlohmann::ordered_json;

Json signal_to_json(const EngagementSignal& s);
EngagementSignal signal_from_json(const Json& j);

}  // namespace pronlearn::detail

#endif  // PRONLEARN_SRC_JSON_UTIL_HPP_
