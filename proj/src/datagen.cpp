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

#include "pronlearn/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <numeric>
#include <set>
#include <string>

#include "pronlearn/errors.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn {

namespace {

constexpr double kBaseAmplitude1 = 0.08;
constexpr double kBaseAmplitude2 = 0.04;
constexpr double kPhoneJitterDb = 1.0;
constexpr std::int64_t kEpoch2026 = 1767225600;  // 2026-01-01T00:00:00Z
constexpr std::int64_t kSignalWindowSeconds = 90 * 86400;

void check_rate(double value, const char* field) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidArgument(std::string("dataset spec: ") + field + " must be in [0, 1], got " +
                          std::to_string(value));
  }
}

std::vector<std::string> numbered(const std::string& prefix, int count, const std::string& suffix = "") {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i) + suffix);
  return out;
}

bool is_native_vowel(int s) { return s >= kFirstNativeVowel && s < kFirstForeignVowel; }
bool is_foreign_vowel(int s) { return s >= kFirstForeignVowel && s < kTtsSymbols; }

std::vector<int> sample_canonical(Rng& rng, bool non_native) {
  std::vector<int> out;
  const int syllables = rng.range(2, 4);
  for (int s = 0; s < syllables; ++s) {
    out.push_back(rng.range(0, kConsonants - 1));
    if (non_native && rng.bernoulli(0.5)) {
      out.push_back(rng.range(kFirstForeignVowel, kTtsSymbols - 1));
    } else {
      out.push_back(rng.range(kFirstNativeVowel, kFirstForeignVowel - 1));
    }
    if (rng.bernoulli(0.3)) out.push_back(rng.range(0, kConsonants - 1));
  }
  return out;
}

// The other reading of a homograph swaps one vowel between its native and
// foreign quality.
std::vector<int> alternate_reading(std::vector<int> items) {
  for (int& s : items) {
    if (is_native_vowel(s)) {
      s += kNativeVowels;
      return items;
    }
  }
  for (int& s : items) {
    if (is_foreign_vowel(s)) {
      s -= kNativeVowels;
      return items;
    }
  }
  throw InvalidArgument("homograph reading needs a vowel");
}

std::vector<int> transcribe(Rng& rng, const std::vector<int>& phones, double allophone_rate) {
  std::vector<int> out;
  out.reserve(phones.size());
  for (int p : phones) {
    if (p < kAllophones && rng.bernoulli(allophone_rate)) {
      out.push_back(kTtsSymbols + p);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

std::string iso_timestamp(std::int64_t seconds) {
  const std::time_t t = static_cast<std::time_t>(seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<EngagementSignal> sample_signals(Rng& rng) {
  std::vector<EngagementSignal> out;
  const int n = rng.range(1, 3);
  for (int k = 0; k < n; ++k) {
    EngagementSignal s;
    const double r = rng.uniform();
    s.task = r < 0.5 ? TaskKind::kCall : (r < 0.8 ? TaskKind::kDirections : TaskKind::kOther);
    s.completed = rng.bernoulli(0.75);
    const double upper = s.completed ? 60.0 : 8.0;
    s.duration_seconds = std::round(rng.uniform(0.0, upper) * 10.0) / 10.0;
    s.timestamp = iso_timestamp(kEpoch2026 + static_cast<std::int64_t>(
                                                 rng.index(static_cast<std::size_t>(kSignalWindowSeconds))));
    out.push_back(std::move(s));
  }
  return out;
}

std::string padded(std::size_t value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

void require_audio(const Corpus& corpus) {
  if (corpus.spec.mode != CorpusMode::kAudio) throw InvalidArgument("corpus has no audio");
}

}  // namespace

std::vector<std::string> default_locales() {
  return {"en-US", "en-CA", "en-GB", "en-AU", "en-IN", "fr-FR", "es-ES", "es-MX", "es-US", "ja-JP"};
}

std::string_view to_string(CorpusMode mode) {
  return mode == CorpusMode::kAudio ? "audio" : "phoneme";
}

CorpusMode parse_corpus_mode(std::string_view text) {
  if (text == "phoneme") return CorpusMode::kPhoneme;
  if (text == "audio") return CorpusMode::kAudio;
  throw InvalidArgument("unknown corpus mode '" + std::string(text) + "'");
}

void DatasetSpec::validate() const {
  if (locales.empty()) throw InvalidArgument("dataset spec: locales must not be empty");
  std::set<std::string> seen;
  for (const auto& l : locales) {
    if (l.empty() || l.find_first_of(" \t\n/\\") != std::string::npos) {
      throw InvalidArgument("dataset spec: locales contains an invalid name '" + l + "'");
    }
    if (!seen.insert(l).second) throw InvalidArgument("dataset spec: locales repeats '" + l + "'");
  }
  if (entities_per_locale == 0) throw InvalidArgument("dataset spec: entities_per_locale must be >= 1");
  check_rate(mispronunciation_rate, "mispronunciation_rate");
  check_rate(homograph_rate, "homograph_rate");
  check_rate(non_native_rate, "non_native_rate");
  check_rate(allophone_rate, "allophone_rate");
  if (mode == CorpusMode::kAudio && variants == 0) {
    throw InvalidArgument("dataset spec: variants must be >= 1 for audio corpora");
  }
  if (!(gain_jitter_db >= 0.0 && gain_jitter_db <= 40.0)) {
    throw InvalidArgument("dataset spec: gain_jitter_db must be in [0, 40]");
  }
  if (!(noise_dbfs_low <= noise_dbfs_high && noise_dbfs_low >= -140.0 && noise_dbfs_high <= -10.0)) {
    throw InvalidArgument("dataset spec: noise_dbfs_low/noise_dbfs_high must satisfy -140 <= low <= high <= -10");
  }
}

DatasetSpec DatasetSpec::phoneme_defaults() { return DatasetSpec{}; }

DatasetSpec DatasetSpec::audio_defaults() {
  DatasetSpec spec;
  spec.mode = CorpusMode::kAudio;
  spec.entities_per_locale = 200;
  spec.mispronunciation_rate = 0.45;
  spec.homograph_rate = 0.22;
  spec.non_native_rate = 0.17;
  spec.variants = 3;
  return spec;
}

PhonemeSequence LocaleInventory::asr_to_tts_space(const PhonemeSequence& asr_seq) const {
  if (asr_seq.phoneset != asr.id()) {
    throw PhonesetMismatch("expected a sequence over " + asr.id() + ", got " + asr_seq.phoneset);
  }
  PhonemeSequence out{tts.id(), {}};
  out.items.reserve(asr_seq.size());
  for (int s : asr_seq.items) out.items.push_back(asr_to_tts.at(static_cast<std::size_t>(s)));
  return out;
}

LocaleInventory make_inventory(const std::string& locale) {
  std::vector<std::string> tts_symbols = numbered("C", kConsonants);
  for (const auto& s : numbered("V", kNativeVowels)) tts_symbols.push_back(s);
  for (const auto& s : numbered("F", kForeignVowels)) tts_symbols.push_back(s);
  std::vector<std::string> asr_symbols;
  for (const auto& s : tts_symbols) {
    std::string lower = s;
    lower[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lower[0])));
    asr_symbols.push_back(lower);
  }
  for (const auto& s : numbered("c", kAllophones, "h")) asr_symbols.push_back(s);

  Phoneset tts(locale + ".tts", locale, PhonesetKind::kTts, tts_symbols);
  Phoneset asr(locale + ".asr", locale, PhonesetKind::kAsr, asr_symbols);
  std::vector<int> primary(kTtsSymbols);
  std::iota(primary.begin(), primary.end(), 0);
  SymbolMapping mapping(tts, asr, primary);

  std::vector<int> asr_to_tts(kAsrSymbols);
  for (int i = 0; i < kAsrSymbols; ++i) asr_to_tts[i] = i < kTtsSymbols ? i : i - kTtsSymbols;

  std::vector<int> slots(kTtsSymbols);
  std::iota(slots.begin(), slots.end(), 0);
  Rng rng(hash_name(locale));
  rng.shuffle(slots);
  std::vector<SymbolVoice> voices(kTtsSymbols);
  for (int s = 0; s < kTtsSymbols; ++s) {
    const double mel1 = 350.0 + 110.0 * slots[s];
    voices[s].f1 = mel_to_hz(mel1);
    voices[s].f2 = std::min(7500.0, mel_to_hz(mel1 + 500.0));
  }
  return LocaleInventory{locale, std::move(asr), std::move(tts), std::move(mapping),
                         std::move(asr_to_tts), std::move(voices)};
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kCalibration:
      return "calibration";
    case Split::kEval:
      return "eval";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "calibration") return Split::kCalibration;
  if (text == "eval") return Split::kEval;
  throw InvalidArgument("unknown split '" + std::string(text) + "'");
}

const LocaleInventory& Corpus::inventory(std::string_view locale) const {
  for (const auto& inv : inventories) {
    if (inv.locale == locale) return inv;
  }
  throw InvalidArgument("corpus has no locale '" + std::string(locale) + "'");
}

std::vector<const Example*> Corpus::select(Split split) const {
  std::vector<const Example*> out;
  for (const auto& e : examples) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

PhonemeSequence perturb(const Phoneset& set, const PhonemeSequence& seq, std::size_t n_edits,
                        std::uint64_t seed) {
  if (seq.empty()) throw InvalidArgument("perturb: empty sequence");
  if (n_edits == 0) throw InvalidArgument("perturb: n_edits must be >= 1");
  validate(set, seq);
  Rng rng(seed);
  const std::size_t alphabet = set.size();
  for (;;) {
    std::vector<int> items = seq.items;
    for (std::size_t e = 0; e < n_edits; ++e) {
      std::size_t op = rng.index(3);
      if (op == 2 && items.size() < 2) op = 0;
      if (op == 0 && alphabet < 2) op = 1;
      if (op == 0) {
        const std::size_t pos = rng.index(items.size());
        const auto shift = static_cast<int>(1 + rng.index(alphabet - 1));
        items[pos] = (items[pos] + shift) % static_cast<int>(alphabet);
      } else if (op == 1) {
        const std::size_t pos = rng.index(items.size() + 1);
        items.insert(items.begin() + static_cast<std::ptrdiff_t>(pos),
                     static_cast<int>(rng.index(alphabet)));
      } else {
        items.erase(items.begin() + static_cast<std::ptrdiff_t>(rng.index(items.size())));
      }
    }
    if (items != seq.items) return PhonemeSequence{seq.phoneset, std::move(items)};
  }
}

Waveform synthesize_audio(const LocaleInventory& inventory, const PhonemeSequence& seq,
                          std::uint64_t seed, double gain_db, double noise_dbfs) {
  if (seq.empty()) throw InvalidArgument("synthesize_audio: empty sequence");
  validate(inventory.tts, seq);
  Waveform w;
  const auto phone = static_cast<std::size_t>(std::lround(kPhoneSeconds * w.sample_rate));
  const auto fade = static_cast<std::size_t>(std::lround(kCrossfadeSeconds * w.sample_rate));
  const std::size_t stride = phone - fade;
  w.samples.assign(stride * (seq.size() - 1) + phone, 0.0);

  Rng rng(seed);
  const double gain = std::pow(10.0, gain_db / 20.0);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const SymbolVoice& v = inventory.voices.at(static_cast<std::size_t>(seq.items[k]));
    const double amp = gain * std::pow(10.0, rng.uniform(-kPhoneJitterDb, kPhoneJitterDb) / 20.0);
    const std::size_t offset = k * stride;
    for (std::size_t i = 0; i < phone; ++i) {
      double env = 1.0;
      if (k > 0 && i < fade) env = static_cast<double>(i) / static_cast<double>(fade);
      if (k + 1 < seq.size() && i >= phone - fade) {
        env = static_cast<double>(phone - i) / static_cast<double>(fade);
      }
      const double t = static_cast<double>(i) / w.sample_rate;
      w.samples[offset + i] += amp * env *
                               (kBaseAmplitude1 * std::sin(2.0 * M_PI * v.f1 * t) +
                                kBaseAmplitude2 * std::sin(2.0 * M_PI * v.f2 * t));
    }
  }
  if (std::isfinite(noise_dbfs)) {
    const double sigma = std::pow(10.0, noise_dbfs / 20.0);
    for (double& x : w.samples) x += sigma * rng.normal();
  }
  return quantize_pcm16(w);
}

Corpus generate_corpus(const DatasetSpec& spec) {
  spec.validate();
  Corpus corpus;
  corpus.spec = spec;
  for (const auto& locale : spec.locales) corpus.inventories.push_back(make_inventory(locale));

  for (const auto& inv : corpus.inventories) {
    const std::uint64_t locale_seed = derive_seed(spec.seed, hash_name(inv.locale));
    const std::size_t n = spec.entities_per_locale;
    const std::size_t users = std::max<std::size_t>(1, n / 4);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng split_rng(derive_seed(locale_seed, 0));
    split_rng.shuffle(order);
    std::vector<Split> splits(n, Split::kEval);
    const std::size_t n_train = n / 2;
    const std::size_t n_cal = (n - n_train) / 2;
    for (std::size_t k = 0; k < n; ++k) {
      splits[order[k]] = k < n_train ? Split::kTrain : (k < n_train + n_cal ? Split::kCalibration : Split::kEval);
    }

    for (std::size_t entity = 0; entity < n; ++entity) {
      Rng rng(derive_seed(locale_seed, entity + 1));
      Example ex;
      ex.id = inv.locale + "-e" + padded(entity, 5);
      ex.locale = inv.locale;
      ex.entity = entity;
      ex.split = splits[entity];
      ex.non_native = rng.bernoulli(spec.non_native_rate);
      ex.homograph = rng.bernoulli(spec.homograph_rate);
      ex.label = rng.bernoulli(spec.mispronunciation_rate);
      ex.user_id = inv.locale + "-u" + padded(rng.index(users), 4);

      const std::vector<int> canonical = sample_canonical(rng, ex.non_native);
      const PhonemeSequence intended{inv.tts.id(), canonical};
      if (!ex.label) {
        ex.tts = intended;
      } else if (ex.homograph) {
        ex.tts = PhonemeSequence{inv.tts.id(), alternate_reading(canonical)};
      } else {
        const std::size_t edits = 1 + rng.index(3);
        ex.tts = perturb(inv.tts, intended, edits, rng.next());
      }
      ex.asr = PhonemeSequence{inv.asr.id(), transcribe(rng, canonical, spec.allophone_rate)};
      ex.signals = sample_signals(rng);
      ex.audio_seed = rng.next();
      corpus.examples.push_back(std::move(ex));
    }
  }
  return corpus;
}

std::string user_audio_name(const Example& example, std::size_t variant) {
  return example.id + "_user_" + std::to_string(variant) + ".wav";
}

std::string tts_audio_name(const Example& example) { return example.id + "_tts_0.wav"; }

Waveform user_audio(const Corpus& corpus, const Example& example, std::size_t variant) {
  require_audio(corpus);
  if (variant >= corpus.spec.variants) throw InvalidArgument("user_audio: variant out of range");
  if (!corpus.root.empty()) return read_wav(corpus.root / "audio" / user_audio_name(example, variant));
  const LocaleInventory& inv = corpus.inventory(example.locale);
  Rng gain_rng(derive_seed(example.audio_seed, 1000 + variant));
  const double gain_db = gain_rng.uniform(-corpus.spec.gain_jitter_db, corpus.spec.gain_jitter_db);
  const double noise_dbfs = gain_rng.uniform(corpus.spec.noise_dbfs_low, corpus.spec.noise_dbfs_high);
  return synthesize_audio(inv, inv.asr_to_tts_space(example.asr),
                          derive_seed(example.audio_seed, 1 + variant), gain_db, noise_dbfs);
}

Waveform tts_audio(const Corpus& corpus, const Example& example) {
  require_audio(corpus);
  if (!corpus.root.empty()) return read_wav(corpus.root / "audio" / tts_audio_name(example));
  return synthesize_audio(corpus.inventory(example.locale), example.tts,
                          derive_seed(example.audio_seed, 0));
}

}  // namespace pronlearn
