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


// Runs the pronlearn executable end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "pronlearn/calibration.hpp"
#include "pronlearn/datagen.hpp"
#include "pronlearn/methods.hpp"
#include "support/files.hpp"

using namespace pronlearn;
using pronlearn::testing::ScratchDir;
using pronlearn::testing::slurp;
using pronlearn::testing::tree_contents;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const ScratchDir& dir, const std::string& args) {
  const fs::path out = dir.path / "stdout.txt";
  const fs::path err = dir.path / "stderr.txt";
  const std::string cmd = "cd '" + dir.path.string() + "' && '" PRONLEARN_CLI "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

Json read_json(const fs::path& path) { return Json::parse(slurp(path)); }

}  // namespace

TEST_CASE("gen-data is deterministic and reports its label rate") {
  ScratchDir dir("cli");
  const std::string args = "gen-data --seed 7 --locales en-US --entities 100";
  REQUIRE(run(dir, args + " --out c1").code == 0);
  REQUIRE(run(dir, args + " --out c2").code == 0);
  CHECK(tree_contents(dir.path / "c1") == tree_contents(dir.path / "c2"));
  REQUIRE(run(dir, "gen-data --seed 8 --locales en-US --entities 100 --out c3").code == 0);
  CHECK(tree_contents(dir.path / "c1") != tree_contents(dir.path / "c3"));

  const Corpus corpus = load_corpus(dir.path / "c1");
  std::size_t labels = 0;
  for (const auto& e : corpus.examples) labels += e.label;
  const Json summary = read_json(dir.path / "c1" / "summary.json");
  CHECK(summary["examples"] == 100);
  CHECK(summary["label_rate"].get<double>() == labels / 100.0);
  // Three standard deviations of a binomial proportion at n = 100.
  CHECK(std::abs(summary["label_rate"].get<double>() - 0.2) < 3.0 * std::sqrt(0.2 * 0.8 / 100));

  REQUIRE(run(dir, "gen-data --mode audio --locales fr-FR --entities 4 --out a").code == 0);
  CHECK(fs::exists(dir.path / "a" / "audio" / "fr-FR-e00000_user_2.wav"));
}

TEST_CASE("exit codes") {
  ScratchDir dir("cli");
  const Run bad_rate = run(dir, "gen-data --out x --mispronunciation-rate 1.5");
  CHECK(bad_rate.code == 2);
  CHECK(bad_rate.err.find("mispronunciation_rate") != std::string::npos);
  CHECK(run(dir, "").code == 2);
  CHECK(run(dir, "frobnicate").code == 2);
  CHECK(run(dir, "train --corpus missing --method gbdt --out m").code == 3);
  CHECK(run(dir, "calibrate --corpus missing --method p2p --out t.json").code == 3);

  REQUIRE(run(dir, "gen-data --locales en-US --entities 80 --out c").code == 0);
  CHECK(run(dir, "train --corpus c --method p2p --out m").code == 2);
  CHECK(run(dir, "train --corpus c --method nonsense --out m").code == 2);
  CHECK(run(dir, "train --corpus c --method dtw-siamese --out m").code == 2);
  CHECK(run(dir, "calibrate --corpus c --method gbdt --out t.json").code == 2);
  CHECK(run(dir, "calibrate --corpus c --method p2p --out t.json --target-precision 1.01").code == 5);
  CHECK(run(dir, "calibrate --corpus c --method p2p --out t.json --target-precision 0").code == 0);
  CHECK(run(dir, "evaluate --corpus c --method p2p --out r.json").code == 2);
  CHECK(run(dir, "evaluate --corpus c --threshold-file missing.json --out r.json").code == 3);
}

TEST_CASE("calibrate meets its target on the calibration split") {
  ScratchDir dir("cli");
  REQUIRE(run(dir, "gen-data --locales en-US,ja-JP --entities 200 --out c").code == 0);
  for (const double target : {0.0, 0.5, 0.95}) {
    REQUIRE(run(dir, "calibrate --corpus c --method p2p --out t.json --target-precision " +
                         std::to_string(target)).code == 0);
    const ThresholdRecord record = load_threshold_record(dir.path / "t.json");
    const Corpus corpus = load_corpus(dir.path / "c");
    std::size_t tp = 0, fp = 0;
    for (const auto& e : corpus.examples) {
      if (e.split != Split::kCalibration) continue;
      const LocaleInventory& inv = corpus.inventory(e.locale);
      if (normalized_distance(e.asr, inv.p2p_mapping.to_asr(e.tts)) > record.point.threshold) {
        (e.label ? tp : fp)++;
      }
    }
    const double precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
    CHECK(precision >= target);
    CHECK(precision == record.point.precision);
    CHECK(record.point.tp == tp);
  }
}

TEST_CASE("evaluate reports the oracle as perfect") {
  ScratchDir dir("cli");
  REQUIRE(run(dir, "gen-data --locales en-US,es-ES --entities 120 --out c").code == 0);
  REQUIRE(run(dir, "calibrate --corpus c --method p2p --out p2p.json").code == 0);
  const Run r = run(dir, "evaluate --corpus c --threshold-file p2p.json --method oracle --method p2p --out r.json");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("oracle (eval split)") != std::string::npos);
  const Json report = read_json(dir.path / "r.json");
  CHECK(report["version"] == 1);
  CHECK(report["split"] == "eval");
  const Json& oracle = report["methods"]["oracle"];
  CHECK(oracle["pooled"]["precision"] == 1.0);
  CHECK(oracle["pooled"]["recall"] == 1.0);
  CHECK(oracle["average"]["percent"] == 100.0);
  for (const auto& [name, method] : report["methods"].items()) {
    CHECK(method.contains("threshold"));
    CHECK(method["locales"].size() == 2);
    for (const auto& [locale, row] : method["locales"].items()) {
      for (const char* key : {"precision", "recall", "tp", "fp", "fn", "tn"}) {
        CHECK(row["intrinsic"].contains(key));
      }
      const double likert = row["extrinsic"]["mean_likert"].get<double>();
      CHECK(likert >= 1.0);
      CHECK(likert <= 3.0);
    }
  }
}

TEST_CASE("simulate-correction matches a recount and persists") {
  ScratchDir dir("cli");
  REQUIRE(run(dir, "gen-data --locales en-IN --entities 200 --mispronunciation-rate 0.4 --out c").code == 0);
  REQUIRE(run(dir, "calibrate --corpus c --method p2p --target-precision 0.5 --out t.json").code == 0);
  REQUIRE(run(dir, "simulate-correction --corpus c --threshold-file t.json --policy-min-seconds 20 --out s").code == 0);
  const Json report = read_json(dir.path / "s" / "simulation.json");
  const Corpus corpus = load_corpus(dir.path / "c");
  const double threshold = threshold_from_json(report["threshold"]);

  std::size_t corrections = 0;
  std::size_t k = 0;
  for (const auto& e : corpus.examples) {
    if (e.split != Split::kEval) continue;
    const Json& o = report["outcomes"][k++];
    CHECK(o["id"] == e.id);
    bool engaged = false;
    for (const auto& s : e.signals) engaged |= s.completed && s.duration_seconds >= 20.0;
    const bool expected = o["score"].get<double>() > threshold && engaged;
    CHECK(o["corrected"] == expected);
    corrections += expected;
  }
  CHECK(report["corrections"] == corrections);
  CHECK(report["store_records"] == corrections);
  CHECK(PronunciationStore::open(dir.path / "s" / "store.ndjson").size() == corrections);

  const auto first = tree_contents(dir.path / "s");
  REQUIRE(run(dir, "simulate-correction --corpus c --threshold-file t.json --policy-min-seconds 20 --out s").code == 0);
  CHECK(tree_contents(dir.path / "s") == first);

  REQUIRE(run(dir, "gen-data --locales en-IN --entities 100 --mispronunciation-rate 0 --out neg").code == 0);
  REQUIRE(run(dir, "simulate-correction --corpus neg --method oracle --out s0").code == 0);
  CHECK(read_json(dir.path / "s0" / "simulation.json")["corrections"] == 0);
}

TEST_CASE("training is reproducible and logs its loss") {
  ScratchDir dir("cli");
  REQUIRE(run(dir, "gen-data --mode audio --locales en-AU --entities 40 --out a").code == 0);
  REQUIRE(run(dir, "train --corpus a --method dtw-siamese --epochs 3 --seed 3 --out m1").code == 0);
  REQUIRE(run(dir, "train --corpus a --method dtw-siamese --epochs 3 --seed 3 --out m2").code == 0);
  CHECK(tree_contents(dir.path / "m1") == tree_contents(dir.path / "m2"));
  const Json log = read_json(dir.path / "m1" / "train_log.json");
  CHECK(log["method"] == "dtw-siamese");
  CHECK(log["stages"][0]["loss"].size() == 3);
  CHECK(log["stages"][0]["final_loss"].get<double>() < log["stages"][0]["initial_loss"].get<double>());
  CHECK(log["metric_updates"].get<std::size_t>() > 0);

  REQUIRE(run(dir, "calibrate --corpus a --method dtw-siamese --model m1 --out t.json --target-precision 0.9").code == 0);
  CHECK(load_threshold_record(dir.path / "t.json").point.precision >= 0.9);
  CHECK(run(dir, "calibrate --corpus a --method gbdt --model m1 --out t.json").code == 2);
}
