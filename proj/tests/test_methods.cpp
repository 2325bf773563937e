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


#include <filesystem>
#include <map>
#include <limits>
#include <set>

#include "doctest.h"
#include "pronlearn/calibration.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/methods.hpp"
#include "support/files.hpp"

using namespace pronlearn;
namespace fs = std::filesystem;
using pronlearn::testing::ScratchDir;

namespace {

Corpus small_phoneme_corpus(double rate = 0.3) {
  DatasetSpec spec;
  spec.locales = {"en-US", "es-MX"};
  spec.entities_per_locale = 120;
  spec.mispronunciation_rate = rate;
  return generate_corpus(spec);
}

Corpus small_audio_corpus() {
  DatasetSpec spec = DatasetSpec::audio_defaults();
  spec.locales = {"en-GB"};
  spec.entities_per_locale = 40;
  return generate_corpus(spec);
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::kP2p, Method::kGbdt, Method::kDtw, Method::kFastDtw, Method::kMelSiamese,
                   Method::kDtwSiamese, Method::kEmbeddings, Method::kOracle}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(to_string(Method::kDtwSiamese) == "dtw-siamese");
  CHECK_THROWS_AS(parse_method("siamese"), InvalidArgument);
  CHECK(is_trainable(Method::kEmbeddings));
  CHECK_FALSE(is_detector(Method::kEmbeddings));
  CHECK_FALSE(is_trainable(Method::kP2p));
  CHECK(uses_audio(Method::kFastDtw));
  CHECK_FALSE(uses_audio(Method::kGbdt));
}

TEST_CASE("oracle detector is perfect") {
  const Corpus corpus = small_phoneme_corpus();
  const auto oracle = make_detector(Method::kOracle);
  const auto items = score_split(*oracle, corpus, Split::kEval);
  CHECK(items.size() == 60);
  const MethodReport r = evaluate_method(corpus, items, 0.5);
  CHECK(r.pooled.precision == 1.0);
  CHECK(r.pooled.recall == 1.0);
  CHECK(r.mean_percent == 100.0);
  CHECK(r.mean_likert == 3.0);
  CHECK(r.locales.size() == 2);

  // Inverted: nothing mispronounced scores above any positive threshold.
  std::vector<ScoredItem> inverted = items;
  for (auto& it : inverted) it.score = 1.0 - it.score;
  for (double t : {0.1, 0.5, 0.9}) CHECK(evaluate_method(corpus, inverted, t).pooled.recall == 0.0);
}

TEST_CASE("p2p evaluation matches a recount") {
  const Corpus corpus = small_phoneme_corpus();
  const auto p2p = make_detector(Method::kP2p);
  const double threshold = 0.2;
  const auto items = score_split(*p2p, corpus, Split::kCalibration);
  const MethodReport r = evaluate_method(corpus, items, threshold);

  std::map<std::string, std::size_t> tp, fp, fn, tn, correct;
  for (const auto& e : corpus.examples) {
    if (e.split != Split::kCalibration) continue;
    const LocaleInventory& inv = corpus.inventory(e.locale);
    const bool flagged = p2p_detect(e.asr, e.tts, inv.p2p_mapping, threshold).mispronounced;
    (flagged ? (e.label ? tp : fp) : (e.label ? fn : tn))[e.locale]++;
    // Unflagged items keep the synthesizer's version, which is right only
    // when it was not mispronounced.
    correct[e.locale] += flagged || !e.label;
  }
  for (const auto& [locale, report] : r.locales) {
    INFO(locale);
    CHECK(report.intrinsic.tp == tp[locale]);
    CHECK(report.intrinsic.fp == fp[locale]);
    CHECK(report.intrinsic.fn == fn[locale]);
    CHECK(report.intrinsic.tn == tn[locale]);
    CHECK(report.extrinsic.percent == doctest::Approx(100.0 * correct[locale] / report.items));
  }
}

TEST_CASE("extrinsic pronunciation follows the flag") {
  const Corpus corpus = small_phoneme_corpus();
  for (const auto& e : corpus.examples) {
    const PhonemeSequence intended = corpus.inventory(e.locale).asr_to_tts_space(e.asr);
    CHECK(final_pronunciation(corpus, e, true) == intended);
    CHECK(final_pronunciation(corpus, e, false) == e.tts);
    CHECK((final_pronunciation(corpus, e, false) == intended) == !e.label);
  }
}

TEST_CASE("method and corpus mismatches") {
  const Corpus corpus = small_phoneme_corpus();
  CHECK_THROWS_AS(score_split(*make_detector(Method::kDtw), corpus, Split::kEval), InvalidArgument);
  CHECK_THROWS_AS(make_detector(Method::kEmbeddings), InvalidArgument);
  ScratchDir dir("methods");
  CHECK_THROWS_AS(train_method(Method::kP2p, corpus, dir.path), InvalidArgument);
  CHECK_THROWS_AS(train_method(Method::kDtwSiamese, corpus, dir.path), InvalidArgument);
  CHECK_THROWS_AS(make_detector(Method::kGbdt, dir.path / "missing"), IoError);
  CHECK_THROWS_AS(evaluate_method(corpus, std::vector<ScoredItem>{}, 0.5), InvalidArgument);
}

TEST_CASE("gbdt train, reload and score") {
  const Corpus corpus = small_phoneme_corpus();
  ScratchDir dir("methods");
  TrainOptions options;
  options.epochs = 2;
  const TrainSummary summary = train_method(Method::kGbdt, corpus, dir.path, options);
  REQUIRE(summary.stages.size() == 4);
  CHECK(summary.stages[0].name == "en-US/seq2seq");
  CHECK(summary.stages[0].loss.size() == 2);
  CHECK(summary.stages[1].name == "en-US/gbdt");
  CHECK(summary.stages[1].loss.back() < summary.stages[1].loss.front());
  for (const char* f : {"model.json", "train_log.json", "en-US.seq2seq", "en-US.gbdt",
                        "es-MX.seq2seq", "es-MX.gbdt"}) {
    CHECK(fs::exists(dir.path / f));
  }
  const auto gbdt = make_detector(Method::kGbdt, dir.path);
  for (const auto& it : score_split(*gbdt, corpus, Split::kEval)) {
    CHECK(it.score >= 0.0);
    CHECK(it.score <= 1.0);
  }
  CHECK_THROWS_AS(make_detector(Method::kMelSiamese, dir.path), InvalidArgument);

  DatasetSpec other = corpus.spec;
  other.locales = {"ja-JP"};
  const Corpus foreign = generate_corpus(other);
  CHECK_THROWS_AS(score_split(*gbdt, foreign, Split::kEval), InvalidArgument);
}

TEST_CASE("audio methods score every recording") {
  const Corpus corpus = small_audio_corpus();
  ScratchDir dir("methods");
  TrainOptions options;
  options.epochs = 2;
  std::size_t updates = 0;
  options.observer = [&](const MetricUpdateEvent& ev) {
    ++updates;
    REQUIRE(ev.metric != nullptr);
    CHECK(ev.min_eigenvalue > 0.0);
  };
  const TrainSummary summary = train_method(Method::kDtwSiamese, corpus, dir.path, options);
  CHECK(summary.metric_updates == updates);
  CHECK(summary.stages.at(0).loss.size() == 2);

  for (Method m : {Method::kDtw, Method::kFastDtw, Method::kDtwSiamese}) {
    const auto detector = make_detector(m, dir.path);
    const auto items = score_split(*detector, corpus, Split::kEval);
    CHECK(items.size() == 3 * corpus.select(Split::kEval).size());
    CHECK(items[1].variant == 1);
  }
  // Exact DTW never costs more than its FastDTW approximation.
  const Example& e = *corpus.select(Split::kEval).front();
  const auto exact = make_detector(Method::kDtw)->score(corpus, e);
  const auto fast = make_detector(Method::kFastDtw)->score(corpus, e);
  for (std::size_t v = 0; v < 3; ++v) CHECK(exact[v] <= fast[v] + 1e-12);
}

TEST_CASE("threshold records round trip") {
  ThresholdRecord r;
  r.method = Method::kDtwSiamese;
  r.model_dir = "models/ds";
  r.target_precision = 0.9;
  r.point = evaluate_at(std::vector<ScoredPair>{{0.3, true}, {0.1, false}}, 0.2);
  const ThresholdRecord back = threshold_record_from_json(to_json(r));
  CHECK(back.method == r.method);
  CHECK(back.model_dir == r.model_dir);
  CHECK(back.point == r.point);
  r.point.threshold = -std::numeric_limits<double>::infinity();
  CHECK(threshold_record_from_json(to_json(r)).point.threshold == r.point.threshold);
  CHECK_THROWS_AS(threshold_record_from_json(nlohmann::ordered_json{{"method", "p2p"}}),
                  InvalidArgument);
}

TEST_CASE("simulated corrections match a recount") {
  const Corpus corpus = small_phoneme_corpus(0.5);
  ScratchDir dir("methods");
  CorrectionPolicy policy;
  policy.min_duration_seconds = 15.0;
  const auto p2p = make_detector(Method::kP2p);
  const double threshold = 0.15;
  SimulationReport report;
  {
    PronunciationStore store = PronunciationStore::open(dir.path / "store.ndjson");
    report = simulate_corrections(*p2p, corpus, Split::kEval, threshold, policy, store);
  }

  std::size_t expected = 0, true_corrections = 0;
  std::map<std::string, std::set<std::string>> by_user;
  std::size_t k = 0;
  for (const auto& e : corpus.examples) {
    if (e.split != Split::kEval) continue;
    const LocaleInventory& inv = corpus.inventory(e.locale);
    const bool flagged = normalized_distance(e.asr, inv.p2p_mapping.to_asr(e.tts)) > threshold;
    bool engaged = false;
    for (const auto& s : e.signals) engaged |= s.completed && s.duration_seconds >= 15.0;
    const bool corrected = flagged && engaged;
    REQUIRE(k < report.outcomes.size());
    CHECK(report.outcomes[k].example_id == e.id);
    CHECK(report.outcomes[k].corrected == corrected);
    ++k;
    expected += corrected;
    true_corrections += corrected && e.label;
    if (corrected) by_user[e.user_id].insert(e.id);
  }
  CHECK(report.outcomes.size() == k);
  CHECK(report.corrections == expected);
  CHECK(report.true_corrections == true_corrections);
  CHECK(expected > 0);

  const PronunciationStore reloaded = PronunciationStore::open(dir.path / "store.ndjson");
  CHECK(reloaded.size() == expected);
  for (const auto& [user, entities] : by_user) {
    std::set<std::string> stored;
    for (const auto& rec : reloaded.records_for(user)) {
      CHECK(rec.user_id == user);
      stored.insert(rec.entity_id);
    }
    CHECK(stored == entities);
  }
}

TEST_CASE("an all-negative corpus yields no corrections") {
  const Corpus corpus = small_phoneme_corpus(0.0);
  ScratchDir dir("methods");
  PronunciationStore store = PronunciationStore::open(dir.path / "store.ndjson");
  const SimulationReport report =
      simulate_corrections(*make_detector(Method::kOracle), corpus, Split::kEval, 0.5, {}, store);
  CHECK(report.corrections == 0);
  CHECK(report.flagged == 0);
  CHECK(report.correction_precision() == 1.0);
  CHECK(store.size() == 0);
}
