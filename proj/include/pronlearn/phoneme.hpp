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

#ifndef PRONLEARN_PHONEME_HPP_
#define PRONLEARN_PHONEME_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pronlearn {

enum class PhonesetKind { kAsr, kTts };

std::string_view to_string(PhonesetKind kind);
PhonesetKind parse_phoneset_kind(std::string_view text);

// A finite, ordered inventory of phoneme symbols for one locale and one
// subsystem. Symbols are unique and the inventory is never empty.
class Phoneset {
 public:
  Phoneset(std::string id, std::string locale, PhonesetKind kind,
           std::vector<std::string> symbols);

  // Text format: header `#phoneset <id> <locale> <ASR|TTS>`, then one symbol
  // per line.
  static Phoneset load(const std::filesystem::path& path);
  static Phoneset parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

  const std::string& id() const { return id_; }
  const std::string& locale() const { return locale_; }
  PhonesetKind kind() const { return kind_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }

  std::optional<int> find(std::string_view symbol) const;
  int index_of(std::string_view symbol) const;  // throws on unknown symbol
  const std::string& symbol(int index) const;

 private:
  std::string id_;
  std::string locale_;
  PhonesetKind kind_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Ordered symbol indices into a named phoneset.
struct PhonemeSequence {
  std::string phoneset;
  std::vector<int> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  bool operator==(const PhonemeSequence&) const = default;
};

// Parses space-separated symbols against `set`.
PhonemeSequence parse_sequence(const Phoneset& set, std::string_view text);
std::string format_sequence(const Phoneset& set, const PhonemeSequence& seq);
void validate(const Phoneset& set, const PhonemeSequence& seq);

// Maps every symbol of a TTS phoneset onto its nearest ASR symbol so that
// the two sides of a comparison share one alphabet.
class SymbolMapping {
 public:
  SymbolMapping(const Phoneset& tts, const Phoneset& asr, std::vector<int> tts_to_asr);

  // Two-column TSV: `<tts symbol>\t<asr symbol>`. Every TTS symbol must be
  // mapped exactly once.
  static SymbolMapping load(const std::filesystem::path& path, const Phoneset& tts,
                            const Phoneset& asr);
  static SymbolMapping parse(std::string_view text, const Phoneset& tts,
                             const Phoneset& asr);
  std::string serialize(const Phoneset& tts, const Phoneset& asr) const;

  const std::string& tts_id() const { return tts_id_; }
  const std::string& asr_id() const { return asr_id_; }
  int map(int tts_index) const { return tts_to_asr_.at(tts_index); }

  PhonemeSequence to_asr(const PhonemeSequence& tts) const;

 private:
  std::string tts_id_;
  std::string asr_id_;
  std::vector<int> tts_to_asr_;
};

// Unit-cost edit distance over raw symbol indices.
std::size_t levenshtein(std::span<const int> a, std::span<const int> b);

// Unit-cost edit distance. Throws PhonesetMismatch when the sequences do not
// share a phoneset.
std::size_t levenshtein(const PhonemeSequence& a, const PhonemeSequence& b);

// levenshtein / max length, in [0, 1]; 0 for two empty sequences.
double normalized_distance(const PhonemeSequence& a, const PhonemeSequence& b);

struct DetectionVerdict {
  double score = 0.0;
  double threshold = 0.0;
  bool mispronounced = false;
};

// mispronounced == (score > threshold).
DetectionVerdict make_verdict(double score, double threshold);

// Phoneme-to-phoneme baseline for sequences already over one alphabet.
DetectionVerdict p2p_detect(const PhonemeSequence& asr, const PhonemeSequence& tts,
                            double threshold);

// Phoneme-to-phoneme baseline across an ASR/TTS phoneset pair: the TTS side is
// rewritten through `mapping` before comparison.
DetectionVerdict p2p_detect(const PhonemeSequence& asr, const PhonemeSequence& tts,
                            const SymbolMapping& mapping, double threshold);

}  // namespace pronlearn

#endif  // PRONLEARN_PHONEME_HPP_
