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

#ifndef PRONLEARN_DATAGEN_HPP_
#define PRONLEARN_DATAGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "pronlearn/audio.hpp"
#include "pronlearn/engagement.hpp"
#include "pronlearn/phoneme.hpp"

namespace pronlearn {

std::vector<std::string> default_locales();

enum class CorpusMode { kPhoneme, kAudio };

std::string_view to_string(CorpusMode mode);
CorpusMode parse_corpus_mode(std::string_view text);

struct DatasetSpec {
  CorpusMode mode = CorpusMode::kPhoneme;
  std::vector<std::string> locales = default_locales();
  std::size_t entities_per_locale = 500;
  double mispronunciation_rate = 0.20;
  double homograph_rate = 0.22;
  double non_native_rate = 0.30;
  // Chance that the recognizer reports an allophone for an affected consonant.
  double allophone_rate = 0.5;
  std::size_t variants = 1;
  // User recordings get a uniform gain offset in [-gain_jitter_db, +gain_jitter_db].
  double gain_jitter_db = 10.0;
  // User recordings get white background noise with an RMS level drawn
  // uniformly from [noise_dbfs_low, noise_dbfs_high] dB full scale.
  double noise_dbfs_low = -70.0;
  double noise_dbfs_high = -35.0;
  std::uint64_t seed = 7;

  // Throws InvalidArgument naming the offending field.
  void validate() const;

  static DatasetSpec phoneme_defaults();
  static DatasetSpec audio_defaults();
};

// Synthetic inventory layout, shared by every locale. TTS: 8 consonants,
// 6 native vowels, 6 foreign vowels. ASR: the same 20 plus allophones of
// the first 4 consonants.
inline constexpr int kConsonants = 8;
inline constexpr int kNativeVowels = 6;
inline constexpr int kForeignVowels = 6;
inline constexpr int kTtsSymbols = kConsonants + kNativeVowels + kForeignVowels;
inline constexpr int kAllophones = 4;
inline constexpr int kAsrSymbols = kTtsSymbols + kAllophones;
inline constexpr int kFirstNativeVowel = kConsonants;
inline constexpr int kFirstForeignVowel = kConsonants + kNativeVowels;

struct SymbolVoice {
  double f1 = 0.0;
  double f2 = 0.0;
};

struct LocaleInventory {
  std::string locale;
  Phoneset asr;
  Phoneset tts;
  SymbolMapping p2p_mapping;    // each TTS symbol to its primary ASR symbol
  std::vector<int> asr_to_tts;  // ground-truth recognizer mapping
  std::vector<SymbolVoice> voices;  // per TTS symbol

  PhonemeSequence asr_to_tts_space(const PhonemeSequence& asr_seq) const;
};

LocaleInventory make_inventory(const std::string& locale);

enum class Split { kTrain, kCalibration, kEval };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct Example {
  std::string id;
  std::string locale;
  std::size_t entity = 0;
  Split split = Split::kTrain;
  std::string user_id;
  PhonemeSequence asr;  // what the recognizer heard from the user
  PhonemeSequence tts;  // what the synthesizer says
  bool label = false;   // true = mispronounced
  bool homograph = false;
  bool non_native = false;
  std::vector<EngagementSignal> signals;
  std::uint64_t audio_seed = 0;

  bool operator==(const Example&) const = default;
};

struct Corpus {
  DatasetSpec spec;
  std::vector<LocaleInventory> inventories;
  std::vector<Example> examples;
  // Directory the corpus was loaded from; audio is read from it when set and
  // re-synthesized otherwise.
  std::filesystem::path root;

  const LocaleInventory& inventory(std::string_view locale) const;
  std::vector<const Example*> select(Split split) const;
  std::size_t variants() const { return spec.mode == CorpusMode::kAudio ? spec.variants : 0; }
};

// Applies n_edits random substitutions, insertions or deletions over `set`.
// The result always differs from the input.
PhonemeSequence perturb(const Phoneset& set, const PhonemeSequence& seq, std::size_t n_edits,
                        std::uint64_t seed);

inline constexpr double kPhoneSeconds = 0.080;
inline constexpr double kCrossfadeSeconds = 0.005;

// Renders a TTS-space sequence as concatenated two-sinusoid phones with
// linear crossfades, quantized to 16-bit PCM. Noise is skipped when
// noise_dbfs is -infinity.
Waveform synthesize_audio(const LocaleInventory& inventory, const PhonemeSequence& seq,
                          std::uint64_t seed, double gain_db = 0.0,
                          double noise_dbfs = -std::numeric_limits<double>::infinity());

Corpus generate_corpus(const DatasetSpec& spec);

Waveform user_audio(const Corpus& corpus, const Example& example, std::size_t variant);
Waveform tts_audio(const Corpus& corpus, const Example& example);

std::string user_audio_name(const Example& example, std::size_t variant);
std::string tts_audio_name(const Example& example);

// Directory layout: corpus.jsonl, spec.json, phonesets/, audio/.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace pronlearn

#endif  // PRONLEARN_DATAGEN_HPP_
