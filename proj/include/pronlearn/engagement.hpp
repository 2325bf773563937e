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

#ifndef PRONLEARN_ENGAGEMENT_HPP_
#define PRONLEARN_ENGAGEMENT_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "pronlearn/phoneme.hpp"

namespace pronlearn {

enum class TaskKind { kCall, kDirections, kOther };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

// An observed outcome of the task the user asked for.
struct EngagementSignal {
  TaskKind task = TaskKind::kOther;
  bool completed = false;
  double duration_seconds = 0.0;
  std::string timestamp;  // UTC ISO-8601

  bool operator==(const EngagementSignal&) const = default;
};

struct CorrectionPolicy {
  double min_duration_seconds = 10.0;
  bool require_completion = true;
  std::size_t min_qualified_events = 1;

  void validate() const;
};

bool signal_qualifies(const EngagementSignal& signal, const CorrectionPolicy& policy);

// True iff the verdict flags a mispronunciation and enough signals qualify.
bool qualify(const DetectionVerdict& verdict, std::span<const EngagementSignal> signals,
             const CorrectionPolicy& policy);

}  // namespace pronlearn

#endif  // PRONLEARN_ENGAGEMENT_HPP_
