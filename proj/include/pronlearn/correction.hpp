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

#ifndef PRONLEARN_CORRECTION_HPP_
#define PRONLEARN_CORRECTION_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pronlearn/audio.hpp"
#include "pronlearn/engagement.hpp"
#include "pronlearn/phoneme.hpp"

namespace pronlearn {

struct AudioReference {
  std::string path;
  TimeSpan span;

  bool operator==(const AudioReference& o) const {
    return path == o.path && span.start == o.span.start && span.end == o.span.end;
  }
};

using Pronunciation = std::variant<PhonemeSequence, AudioReference>;

enum class RecordSource { kUserDerived };

struct PronunciationRecord {
  std::string user_id;
  std::string entity_id;
  Pronunciation pronunciation;
  RecordSource source = RecordSource::kUserDerived;
  std::string created_at;  // UTC ISO-8601
  std::vector<EngagementSignal> evidence;

  bool operator==(const PronunciationRecord&) const = default;
};

// Per-user pronunciation overrides backed by an append-only NDJSON log.
// Every write is flushed to disk before returning. Opening a store replays
// the log (latest record per key wins), drops a torn final line and rewrites
// the file if it held superseded records.
class PronunciationStore {
 public:
  static PronunciationStore open(const std::filesystem::path& path);

  // Appends and commits `record`, replacing any earlier record for the same
  // (user, entity). On I/O failure the in-memory contents are unchanged.
  void put(const PronunciationRecord& record);

  std::optional<PronunciationRecord> get(const std::string& user_id,
                                         const std::string& entity_id) const;
  std::vector<PronunciationRecord> records_for(const std::string& user_id) const;

  std::size_t size() const { return records_.size(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  explicit PronunciationStore(std::filesystem::path path) : path_(std::move(path)) {}

  std::filesystem::path path_;
  std::map<std::pair<std::string, std::string>, PronunciationRecord> records_;
};

void apply_correction(PronunciationStore& store, const std::string& user_id,
                      const std::string& entity_id, const Pronunciation& pronunciation,
                      const std::vector<EngagementSignal>& evidence,
                      const CorrectionPolicy& policy = {});

std::optional<PronunciationRecord> lookup(const PronunciationStore& store,
                                          const std::string& user_id,
                                          const std::string& entity_id);

struct Interaction {
  std::string user_id;
  std::string entity_id;
  PhonemeSequence user_pron;  // ASR side
  PhonemeSequence tts_pron;
  std::optional<AudioReference> user_audio;
  std::vector<EngagementSignal> signals;
};

// Higher scores mean more likely mispronounced.
using InteractionScorer = std::function<double(const Interaction&)>;

struct PipelineOutcome {
  DetectionVerdict verdict;
  bool corrected = false;
};

// detect -> qualify -> apply_correction. The stored pronunciation is the
// user's audio reference when present, otherwise the ASR sequence.
PipelineOutcome run_pipeline(const InteractionScorer& scorer, PronunciationStore& store,
                             const Interaction& interaction, double threshold,
                             const CorrectionPolicy& policy);

}  // namespace pronlearn

#endif  // PRONLEARN_CORRECTION_HPP_
