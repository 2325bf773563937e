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

#include "pronlearn/correction.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <string_view>

#include "io_util.hpp"
#include "json_util.hpp"
#include "pronlearn/errors.hpp"

namespace pronlearn {

namespace {

using detail::Json;

constexpr int kStoreVersion = 1;
constexpr const char* kStoreFormat = "pronlearn-store";

std::string version_line() {
  return Json{{"format", kStoreFormat}, {"version", kStoreVersion}}.dump() + "\n";
}

Json record_to_json(const PronunciationRecord& r) {
  Json j;
  j["user_id"] = r.user_id;
  j["entity_id"] = r.entity_id;
  j["source"] = "user_derived";
  j["created_at"] = r.created_at;
  if (const auto* seq = std::get_if<PhonemeSequence>(&r.pronunciation)) {
    j["pronunciation"] = {{"kind", "phonemes"}, {"phoneset", seq->phoneset}, {"items", seq->items}};
  } else {
    const auto& audio = std::get<AudioReference>(r.pronunciation);
    j["pronunciation"] = {{"kind", "audio"},
                          {"path", audio.path},
                          {"start", audio.span.start},
                          {"end", audio.span.end}};
  }
  Json evidence = Json::array();
  for (const auto& s : r.evidence) evidence.push_back(detail::signal_to_json(s));
  j["evidence"] = std::move(evidence);
  return j;
}

PronunciationRecord record_from_json(const Json& j) {
  PronunciationRecord r;
  r.user_id = j.at("user_id").get<std::string>();
  r.entity_id = j.at("entity_id").get<std::string>();
  if (j.at("source").get<std::string>() != "user_derived") throw IoError("unknown record source");
  r.created_at = j.at("created_at").get<std::string>();
  const Json& p = j.at("pronunciation");
  const std::string kind = p.at("kind").get<std::string>();
  if (kind == "phonemes") {
    r.pronunciation = PhonemeSequence{p.at("phoneset").get<std::string>(),
                                      p.at("items").get<std::vector<int>>()};
  } else if (kind == "audio") {
    r.pronunciation = AudioReference{p.at("path").get<std::string>(),
                                     {p.at("start").get<double>(), p.at("end").get<double>()}};
  } else {
    throw IoError("unknown pronunciation kind '" + kind + "'");
  }
  for (const auto& s : j.at("evidence")) r.evidence.push_back(detail::signal_from_json(s));
  return r;
}

[[noreturn]] void throw_errno(const std::string& what, const std::filesystem::path& path) {
  throw IoError(what + " " + path.string() + ": " + std::strerror(errno));
}

class Fd {
 public:
  Fd(const std::filesystem::path& path, int flags) : fd_(::open(path.c_str(), flags, 0644)) {
    if (fd_ < 0) throw_errno("cannot open", path);
  }
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

void write_all(int fd, std::string_view data, const std::filesystem::path& path) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("failed writing", path);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_directory(const std::filesystem::path& file) {
  auto dir = file.parent_path();
  if (dir.empty()) dir = ".";
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

// Replaces `path` with `contents` via a synced temporary and rename.
void replace_file(const std::filesystem::path& path, std::string_view contents) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    Fd fd(tmp, O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC);
    write_all(fd.get(), contents, tmp);
    if (::fsync(fd.get()) != 0) throw_errno("cannot sync", tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
  sync_directory(path);
}

std::size_t qualified_count(const std::vector<EngagementSignal>& evidence,
                            const CorrectionPolicy& policy) {
  return static_cast<std::size_t>(std::count_if(
      evidence.begin(), evidence.end(),
      [&](const EngagementSignal& s) { return signal_qualifies(s, policy); }));
}

}  // namespace

PronunciationStore PronunciationStore::open(const std::filesystem::path& path) {
  PronunciationStore store(path);
  if (!std::filesystem::exists(path)) {
    replace_file(path, version_line());
    return store;
  }
  const std::string text = detail::read_file(path);
  const auto lines = detail::split_lines(text);
  const bool torn_tail = !text.empty() && text.back() != '\n';
  if (lines.empty() || (lines.size() == 1 && torn_tail)) {
    replace_file(path, version_line());
    return store;
  }
  try {
    const Json header = Json::parse(lines[0]);
    if (header.at("format").get<std::string>() != kStoreFormat ||
        header.at("version").get<int>() != kStoreVersion) {
      throw IoError("unsupported store header");
    }
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ":1: " + e.what());
  }
  std::size_t appended = 0;
  bool dropped_tail = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const bool last = i + 1 == lines.size();
    try {
      PronunciationRecord r = record_from_json(Json::parse(lines[i]));
      auto key = std::make_pair(r.user_id, r.entity_id);
      store.records_.insert_or_assign(std::move(key), std::move(r));
      ++appended;
    } catch (const std::exception& e) {
      // A write interrupted mid-line leaves an unterminated final line.
      if (last && torn_tail) {
        dropped_tail = true;
        continue;
      }
      throw IoError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (dropped_tail || torn_tail || appended != store.records_.size()) {
    std::string compacted = version_line();
    for (const auto& [key, r] : store.records_) compacted += record_to_json(r).dump() + "\n";
    replace_file(path, compacted);
  }
  return store;
}

void PronunciationStore::put(const PronunciationRecord& record) {
  if (record.user_id.empty() || record.entity_id.empty()) {
    throw InvalidArgument("record needs a user_id and an entity_id");
  }
  const std::string line = record_to_json(record).dump() + "\n";
  Fd fd(path_, O_WRONLY | O_APPEND | O_CLOEXEC);
  const off_t before = ::lseek(fd.get(), 0, SEEK_END);
  try {
    write_all(fd.get(), line, path_);
    if (::fsync(fd.get()) != 0) throw_errno("cannot sync", path_);
  } catch (...) {
    if (before >= 0 && ::ftruncate(fd.get(), before) == 0) ::fsync(fd.get());
    throw;
  }
  records_.insert_or_assign(std::make_pair(record.user_id, record.entity_id), record);
}

std::optional<PronunciationRecord> PronunciationStore::get(const std::string& user_id,
                                                           const std::string& entity_id) const {
  const auto it = records_.find(std::make_pair(user_id, entity_id));
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<PronunciationRecord> PronunciationStore::records_for(const std::string& user_id) const {
  std::vector<PronunciationRecord> out;
  for (auto it = records_.lower_bound(std::make_pair(user_id, std::string()));
       it != records_.end() && it->first.first == user_id; ++it) {
    out.push_back(it->second);
  }
  return out;
}

void apply_correction(PronunciationStore& store, const std::string& user_id,
                      const std::string& entity_id, const Pronunciation& pronunciation,
                      const std::vector<EngagementSignal>& evidence,
                      const CorrectionPolicy& policy) {
  policy.validate();
  if (qualified_count(evidence, policy) < policy.min_qualified_events) {
    throw InvalidArgument("evidence does not satisfy the correction policy");
  }
  PronunciationRecord record;
  record.user_id = user_id;
  record.entity_id = entity_id;
  record.pronunciation = pronunciation;
  for (const auto& s : evidence) {
    if (signal_qualifies(s, policy)) record.created_at = std::max(record.created_at, s.timestamp);
  }
  record.evidence = evidence;
  store.put(record);
}

std::optional<PronunciationRecord> lookup(const PronunciationStore& store,
                                          const std::string& user_id,
                                          const std::string& entity_id) {
  return store.get(user_id, entity_id);
}

PipelineOutcome run_pipeline(const InteractionScorer& scorer, PronunciationStore& store,
                             const Interaction& interaction, double threshold,
                             const CorrectionPolicy& policy) {
  PipelineOutcome out;
  out.verdict = make_verdict(scorer(interaction), threshold);
  if (!qualify(out.verdict, interaction.signals, policy)) return out;
  const Pronunciation pron = interaction.user_audio
                                 ? Pronunciation{*interaction.user_audio}
                                 : Pronunciation{interaction.user_pron};
  apply_correction(store, interaction.user_id, interaction.entity_id, pron, interaction.signals,
                   policy);
  out.corrected = true;
  return out;
}

}  // namespace pronlearn
