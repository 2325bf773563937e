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

#include "pronlearn/engagement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pronlearn/errors.hpp"

namespace pronlearn {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kCall:
      return "call";
    case TaskKind::kDirections:
      return "directions";
    case TaskKind::kOther:
      return "other";
  }
  return "other";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "call") return TaskKind::kCall;
  if (text == "directions") return TaskKind::kDirections;
  if (text == "other") return TaskKind::kOther;
  throw InvalidArgument("unknown task kind '" + std::string(text) + "'");
}

void CorrectionPolicy::validate() const {
  if (!(min_duration_seconds >= 0.0) || !std::isfinite(min_duration_seconds)) {
    throw InvalidArgument("policy: min_duration_seconds must be a finite value >= 0");
  }
  if (min_qualified_events < 1) throw InvalidArgument("policy: min_qualified_events must be >= 1");
}

bool signal_qualifies(const EngagementSignal& signal, const CorrectionPolicy& policy) {
  if (policy.require_completion && !signal.completed) return false;
  return signal.duration_seconds >= policy.min_duration_seconds;
}

bool qualify(const DetectionVerdict& verdict, std::span<const EngagementSignal> signals,
             const CorrectionPolicy& policy) {
  policy.validate();
  if (!verdict.mispronounced) return false;
  const auto count = std::count_if(signals.begin(), signals.end(), [&](const EngagementSignal& s) {
    return signal_qualifies(s, policy);
  });
  return static_cast<std::size_t>(count) >= policy.min_qualified_events;
}

}  // namespace pronlearn
