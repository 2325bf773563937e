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

#include "json_util.hpp"

#include <string>

#include "pronlearn/errors.hpp"

namespace pronlearn::detail {

Json signal_to_json(const EngagementSignal& s) {
  return {{"task", std::string(to_string(s.task))},
          {"completed", s.completed},
          {"duration_seconds", s.duration_seconds},
          {"timestamp", s.timestamp}};
}

EngagementSignal signal_from_json(const Json& j) {
  EngagementSignal sig;
  sig.task = parse_task_kind(j.at("task").get<std::string>());
  sig.completed = j.at("completed").get<bool>();
  sig.duration_seconds = j.at("duration_seconds").get<double>();
  if (sig.duration_seconds < 0.0) throw InvalidArgument("negative signal duration");
  sig.timestamp = j.at("timestamp").get<std::string>();
  return sig;
}

}  // namespace pronlearn::detail
