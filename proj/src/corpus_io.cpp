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

#include <string>

#include "io_util.hpp"
#include "json_util.hpp"
#include "pronlearn/datagen.hpp"
#include "pronlearn/errors.hpp"

namespace pronlearn {

namespace {

using detail::Json;
namespace fs = std::filesystem;

Json spec_to_json(const DatasetSpec& spec) {
  Json j;
  j["version"] = 1;
  j["mode"] = std::string(to_string(spec.mode));
  j["locales"] = spec.locales;
  j["entities_per_locale"] = spec.entities_per_locale;
  j["mispronunciation_rate"] = spec.mispronunciation_rate;
  j["homograph_rate"] = spec.homograph_rate;
  j["non_native_rate"] = spec.non_native_rate;
  j["allophone_rate"] = spec.allophone_rate;
  j["variants"] = spec.variants;
  j["gain_jitter_db"] = spec.gain_jitter_db;
  j["noise_dbfs_low"] = spec.noise_dbfs_low;
  j["noise_dbfs_high"] = spec.noise_dbfs_high;
  j["seed"] = spec.seed;
  return j;
}

DatasetSpec spec_from_json(const Json& j) {
  if (j.at("version").get<int>() != 1) throw IoError("spec.json: unsupported version");
  DatasetSpec spec;
  spec.mode = parse_corpus_mode(j.at("mode").get<std::string>());
  spec.locales = j.at("locales").get<std::vector<std::string>>();
  spec.entities_per_locale = j.at("entities_per_locale").get<std::size_t>();
  spec.mispronunciation_rate = j.at("mispronunciation_rate").get<double>();
  spec.homograph_rate = j.at("homograph_rate").get<double>();
  spec.non_native_rate = j.at("non_native_rate").get<double>();
  spec.allophone_rate = j.at("allophone_rate").get<double>();
  spec.variants = j.at("variants").get<std::size_t>();
  spec.gain_jitter_db = j.at("gain_jitter_db").get<double>();
  spec.noise_dbfs_low = j.at("noise_dbfs_low").get<double>();
  spec.noise_dbfs_high = j.at("noise_dbfs_high").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

Json example_to_json(const Example& e, const LocaleInventory& inv) {
  Json j;
  j["id"] = e.id;
  j["locale"] = e.locale;
  j["entity"] = e.entity;
  j["split"] = std::string(to_string(e.split));
  j["user_id"] = e.user_id;
  j["asr"] = format_sequence(inv.asr, e.asr);
  j["tts"] = format_sequence(inv.tts, e.tts);
  j["label"] = e.label;
  j["homograph"] = e.homograph;
  j["non_native"] = e.non_native;
  j["audio_seed"] = e.audio_seed;
  Json signals = Json::array();
  for (const auto& s : e.signals) signals.push_back(detail::signal_to_json(s));
  j["signals"] = std::move(signals);
  return j;
}

Example example_from_json(const Json& j, const Corpus& corpus) {
  Example e;
  e.id = j.at("id").get<std::string>();
  e.locale = j.at("locale").get<std::string>();
  const LocaleInventory& inv = corpus.inventory(e.locale);
  e.entity = j.at("entity").get<std::size_t>();
  e.split = parse_split(j.at("split").get<std::string>());
  e.user_id = j.at("user_id").get<std::string>();
  e.asr = parse_sequence(inv.asr, j.at("asr").get<std::string>());
  e.tts = parse_sequence(inv.tts, j.at("tts").get<std::string>());
  e.label = j.at("label").get<bool>();
  e.homograph = j.at("homograph").get<bool>();
  e.non_native = j.at("non_native").get<bool>();
  e.audio_seed = j.at("audio_seed").get<std::uint64_t>();
  for (const auto& s : j.at("signals")) e.signals.push_back(detail::signal_from_json(s));
  return e;
}

}  // namespace

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "phonesets", ec);
  if (ec) throw IoError("cannot create " + (dir / "phonesets").string() + ": " + ec.message());
  detail::write_file(dir / "spec.json", spec_to_json(corpus.spec).dump(2) + "\n");
  for (const auto& inv : corpus.inventories) {
    inv.asr.save(dir / "phonesets" / (inv.locale + ".asr.txt"));
    inv.tts.save(dir / "phonesets" / (inv.locale + ".tts.txt"));
    detail::write_file(dir / "phonesets" / (inv.locale + ".map.tsv"),
                       inv.p2p_mapping.serialize(inv.tts, inv.asr));
  }
  std::string lines;
  for (const auto& e : corpus.examples) {
    lines += example_to_json(e, corpus.inventory(e.locale)).dump();
    lines += '\n';
  }
  detail::write_file(dir / "corpus.jsonl", lines);

  if (corpus.spec.mode == CorpusMode::kAudio) {
    fs::create_directories(dir / "audio", ec);
    if (ec) throw IoError("cannot create " + (dir / "audio").string() + ": " + ec.message());
    for (const auto& e : corpus.examples) {
      for (std::size_t v = 0; v < corpus.spec.variants; ++v) {
        write_wav(dir / "audio" / user_audio_name(e, v), user_audio(corpus, e, v));
      }
      write_wav(dir / "audio" / tts_audio_name(e), tts_audio(corpus, e));
    }
  }
}

Corpus load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("corpus directory not found: " + dir.string());
  Corpus corpus;
  try {
    corpus.spec = spec_from_json(Json::parse(detail::read_file(dir / "spec.json")));
  } catch (const Json::exception& e) {
    throw IoError(std::string("spec.json: ") + e.what());
  }
  corpus.spec.validate();
  for (const auto& locale : corpus.spec.locales) {
    LocaleInventory inv = make_inventory(locale);
    const fs::path base = dir / "phonesets" / locale;
    if (Phoneset::load(base.string() + ".asr.txt").symbols() != inv.asr.symbols() ||
        Phoneset::load(base.string() + ".tts.txt").symbols() != inv.tts.symbols()) {
      throw IoError("phonesets for " + locale + " do not match the generator inventory");
    }
    corpus.inventories.push_back(std::move(inv));
  }
  const std::string text = detail::read_file(dir / "corpus.jsonl");
  std::size_t line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      corpus.examples.push_back(example_from_json(Json::parse(line), corpus));
    } catch (const Json::exception& e) {
      throw IoError("corpus.jsonl:" + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw IoError("corpus.jsonl:" + std::to_string(line_no) + ": " + e.what());
    }
  }
  corpus.root = dir;
  return corpus;
}

}  // namespace pronlearn
