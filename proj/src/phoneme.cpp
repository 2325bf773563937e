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

#include "pronlearn/phoneme.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "io_util.hpp"
#include "pronlearn/errors.hpp"

namespace pronlearn {

std::string_view to_string(PhonesetKind kind) {
  return kind == PhonesetKind::kAsr ? "ASR" : "TTS";
}

PhonesetKind parse_phoneset_kind(std::string_view text) {
  if (text == "ASR") return PhonesetKind::kAsr;
  if (text == "TTS") return PhonesetKind::kTts;
  throw InvalidArgument("phoneset kind must be ASR or TTS, got '" + std::string(text) + "'");
}

Phoneset::Phoneset(std::string id, std::string locale, PhonesetKind kind,
                   std::vector<std::string> symbols)
    : id_(std::move(id)), locale_(std::move(locale)), kind_(kind), symbols_(std::move(symbols)) {
  if (id_.empty()) throw InvalidArgument("phoneset id is empty");
  if (symbols_.empty()) throw InvalidArgument("phoneset '" + id_ + "' has no symbols");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const auto& s = symbols_[i];
    if (s.empty() || std::any_of(s.begin(), s.end(), [](char c) {
          return std::isspace(static_cast<unsigned char>(c));
        })) {
      throw InvalidArgument("phoneset '" + id_ + "' has a blank or whitespace symbol");
    }
    if (!index_.emplace(s, static_cast<int>(i)).second) {
      throw InvalidArgument("phoneset '" + id_ + "' repeats symbol '" + s + "'");
    }
  }
}

Phoneset Phoneset::parse(std::string_view text) {
  const auto lines = detail::split_lines(text);
  std::size_t pos = 0;
  while (pos < lines.size() && detail::trim(lines[pos]).empty()) ++pos;
  if (pos == lines.size()) throw InvalidArgument("phoneset file is empty");
  const auto header = detail::split_whitespace(lines[pos]);
  if (header.size() != 4 || header[0] != "#phoneset") {
    throw InvalidArgument("phoneset header must be '#phoneset <id> <locale> <ASR|TTS>'");
  }
  std::vector<std::string> symbols;
  for (++pos; pos < lines.size(); ++pos) {
    const auto line = detail::trim(lines[pos]);
    if (line.empty()) continue;
    symbols.emplace_back(line);
  }
  return Phoneset(std::string(header[1]), std::string(header[2]),
                  parse_phoneset_kind(header[3]), std::move(symbols));
}

Phoneset Phoneset::load(const std::filesystem::path& path) {
  return parse(detail::read_file(path));
}

std::string Phoneset::serialize() const {
  std::string out = "#phoneset " + id_ + " " + locale_ + " " + std::string(to_string(kind_)) + "\n";
  for (const auto& s : symbols_) out += s + "\n";
  return out;
}

void Phoneset::save(const std::filesystem::path& path) const {
  detail::write_file(path, serialize());
}

std::optional<int> Phoneset::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Phoneset::index_of(std::string_view symbol) const {
  auto idx = find(symbol);
  if (!idx) {
    throw InvalidArgument("symbol '" + std::string(symbol) + "' not in phoneset '" + id_ + "'");
  }
  return *idx;
}

const std::string& Phoneset::symbol(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= symbols_.size()) {
    throw InvalidArgument("symbol index out of range for phoneset '" + id_ + "'");
  }
  return symbols_[static_cast<std::size_t>(index)];
}

PhonemeSequence parse_sequence(const Phoneset& set, std::string_view text) {
  PhonemeSequence seq{set.id(), {}};
  for (auto token : detail::split_whitespace(text)) seq.items.push_back(set.index_of(token));
  return seq;
}

std::string format_sequence(const Phoneset& set, const PhonemeSequence& seq) {
  validate(set, seq);
  std::string out;
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    if (i) out += ' ';
    out += set.symbol(seq.items[i]);
  }
  return out;
}

void validate(const Phoneset& set, const PhonemeSequence& seq) {
  if (seq.phoneset != set.id()) {
    throw PhonesetMismatch("sequence over '" + seq.phoneset + "' used with phoneset '" +
                           set.id() + "'");
  }
  for (int idx : seq.items) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= set.size()) {
      throw InvalidArgument("symbol index out of range for phoneset '" + set.id() + "'");
    }
  }
}

SymbolMapping::SymbolMapping(const Phoneset& tts, const Phoneset& asr, std::vector<int> tts_to_asr)
    : tts_id_(tts.id()), asr_id_(asr.id()), tts_to_asr_(std::move(tts_to_asr)) {
  if (tts_to_asr_.size() != tts.size()) {
    throw InvalidArgument("mapping must cover every symbol of '" + tts.id() + "'");
  }
  for (int a : tts_to_asr_) {
    if (a < 0 || static_cast<std::size_t>(a) >= asr.size()) {
      throw InvalidArgument("mapping targets a symbol outside '" + asr.id() + "'");
    }
  }
}

SymbolMapping SymbolMapping::parse(std::string_view text, const Phoneset& tts,
                                   const Phoneset& asr) {
  std::vector<int> table(tts.size(), -1);
  for (auto raw : detail::split_lines(text)) {
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = detail::split_char(line, '\t');
    if (cols.size() != 2) throw InvalidArgument("mapping line must have two tab-separated columns");
    const int t = tts.index_of(detail::trim(cols[0]));
    const int a = asr.index_of(detail::trim(cols[1]));
    if (table[static_cast<std::size_t>(t)] != -1) {
      throw InvalidArgument("mapping lists TTS symbol '" + std::string(cols[0]) + "' twice");
    }
    table[static_cast<std::size_t>(t)] = a;
  }
  for (std::size_t t = 0; t < table.size(); ++t) {
    if (table[t] == -1) {
      throw InvalidArgument("mapping has no entry for TTS symbol '" +
                            tts.symbol(static_cast<int>(t)) + "'");
    }
  }
  return SymbolMapping(tts, asr, std::move(table));
}

SymbolMapping SymbolMapping::load(const std::filesystem::path& path, const Phoneset& tts,
                                  const Phoneset& asr) {
  return parse(detail::read_file(path), tts, asr);
}

std::string SymbolMapping::serialize(const Phoneset& tts, const Phoneset& asr) const {
  std::string out;
  for (std::size_t t = 0; t < tts_to_asr_.size(); ++t) {
    out += tts.symbol(static_cast<int>(t)) + "\t" + asr.symbol(tts_to_asr_[t]) + "\n";
  }
  return out;
}

PhonemeSequence SymbolMapping::to_asr(const PhonemeSequence& tts) const {
  if (tts.phoneset != tts_id_) {
    throw PhonesetMismatch("mapping expects '" + tts_id_ + "', got '" + tts.phoneset + "'");
  }
  PhonemeSequence out{asr_id_, {}};
  out.items.reserve(tts.items.size());
  for (int t : tts.items) {
    if (t < 0 || static_cast<std::size_t>(t) >= tts_to_asr_.size()) {
      throw InvalidArgument("symbol index out of range for phoneset '" + tts_id_ + "'");
    }
    out.items.push_back(tts_to_asr_[static_cast<std::size_t>(t)]);
  }
  return out;
}

std::size_t levenshtein(std::span<const int> a, std::span<const int> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein(const PhonemeSequence& a, const PhonemeSequence& b) {
  if (a.phoneset != b.phoneset) {
    throw PhonesetMismatch("cannot compare '" + a.phoneset + "' with '" + b.phoneset +
                           "' without a symbol mapping");
  }
  return levenshtein(std::span<const int>(a.items), std::span<const int>(b.items));
}

double normalized_distance(const PhonemeSequence& a, const PhonemeSequence& b) {
  const std::size_t d = levenshtein(a, b);
  const std::size_t n = std::max(a.size(), b.size());
  if (n == 0) return 0.0;
  return static_cast<double>(d) / static_cast<double>(n);
}

DetectionVerdict make_verdict(double score, double threshold) {
  return DetectionVerdict{score, threshold, score > threshold};
}

DetectionVerdict p2p_detect(const PhonemeSequence& asr, const PhonemeSequence& tts,
                            double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("p2p threshold must be >= 0");
  return make_verdict(normalized_distance(asr, tts), threshold);
}

DetectionVerdict p2p_detect(const PhonemeSequence& asr, const PhonemeSequence& tts,
                            const SymbolMapping& mapping, double threshold) {
  if (asr.phoneset != mapping.asr_id()) {
    throw PhonesetMismatch("mapping expects ASR phoneset '" + mapping.asr_id() + "', got '" +
                           asr.phoneset + "'");
  }
  return p2p_detect(asr, mapping.to_asr(tts), threshold);
}

}  // namespace pronlearn
