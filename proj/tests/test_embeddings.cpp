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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pronlearn/datagen.hpp"
#include "pronlearn/embeddings.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/nn/gradcheck.hpp"
#include "pronlearn/rng.hpp"

using namespace pronlearn;

namespace {

const LocaleInventory& inventory() {
  static const LocaleInventory inv = make_inventory("en-US");
  return inv;
}

// Random pairs where the TTS side is the ASR side with allophones folded
// onto their base consonant and an occasional vowel rewrite.
std::vector<SequencePair> toy_pairs(std::size_t n, std::uint64_t seed) {
  const LocaleInventory& inv = inventory();
  Rng rng(seed);
  std::vector<SequencePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    SequencePair p{{inv.asr.id(), {}}, {inv.tts.id(), {}}};
    const std::size_t len = rng.range(3, 8);
    for (std::size_t k = 0; k < len; ++k) {
      const int s = static_cast<int>(rng.index(inv.asr.size()));
      p.asr.items.push_back(s);
      p.tts.items.push_back(inv.asr_to_tts[static_cast<std::size_t>(s)]);
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("embed_sequence") {
  EmbeddingTable table{"x", Eigen::MatrixXd::Random(5, 3)};
  const Eigen::MatrixXd empty = embed_sequence(table, {"x", {}});
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 3);
  const Eigen::MatrixXd three = embed_sequence(table, {"x", {2, 0, 2}});
  CHECK(three.rows() == 3);
  CHECK(three.row(0) == three.row(2));
  CHECK(three.row(1) == table.vectors.row(0));
  CHECK_THROWS_AS(embed_sequence(table, {"y", {0}}), PhonesetMismatch);
  CHECK_THROWS_AS(embed_sequence(table, {"x", {3}}), InvalidArgument);  // a marker row
}

TEST_CASE("model shapes and inference contracts") {
  const LocaleInventory& inv = inventory();
  Seq2SeqConfig config;
  config.max_length = 6;
  const Seq2SeqModel model(config, inv.asr, inv.tts);
  const auto [src, tgt] = extract_embeddings(model);
  CHECK(src.vectors.rows() == 26);
  CHECK(tgt.vectors.rows() == 22);
  CHECK(src.dim() == 64);
  CHECK(src.phoneset == inv.asr.id());
  CHECK(extract_embeddings(model).first == src);

  const PhonemeSequence asr = parse_sequence(inv.asr, "c0h v1 c2 f3");
  const Eigen::MatrixXd enc = model.encoder_outputs(asr);
  CHECK(enc.rows() == 4);
  CHECK(enc.cols() == 100);

  const Seq2SeqTrace trace = model.trace(asr);
  CHECK(trace.output.size() <= 6);
  CHECK(trace.output.phoneset == inv.tts.id());
  CHECK(model.decode(asr) == trace.output);
  CHECK(trace.attention.size() == trace.output.size() + 1);  // plus the stopping step
  for (const auto& step : trace.attention) {
    REQUIRE(step.size() == 2);
    for (const auto& w : step) {
      CHECK(w.size() == 6);  // markers included
      CHECK(w.minCoeff() >= 0.0);
      CHECK(std::abs(w.sum() - 1.0) < 1e-6);
    }
  }
  CHECK_THROWS_AS(model.decode(parse_sequence(inv.tts, "C0")), PhonesetMismatch);
  CHECK_THROWS_AS(model.decode(PhonemeSequence{inv.asr.id(), std::vector<int>(7, 0)}),
                  InvalidArgument);
}

TEST_CASE("loss gradients") {
  const LocaleInventory& inv = inventory();
  Seq2SeqConfig config;
  config.embedding_dim = 3;
  config.hidden = 4;
  const auto pairs = toy_pairs(5, 3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    config.seed = seed;
    Seq2SeqModel model(config, inv.asr, inv.tts);
    const auto result = nn::grad_check(model.parameters(), [&](nn::Graph& g) {
      return model.loss(g, pairs[seed - 1]);
    });
    INFO("seed " << seed << " worst " << result.worst_parameter);
    CHECK(result.max_relative_error < 1e-3);
  }
}

TEST_CASE("single pair overfits") {
  const LocaleInventory& inv = inventory();
  const std::vector<SequencePair> one = {
      {parse_sequence(inv.asr, "c1 v2 c3h f0"), parse_sequence(inv.tts, "C1 V2 C3 F0")}};
  Seq2SeqConfig config;
  config.epochs = 150;
  Seq2SeqTrainResult result;
  const Seq2SeqModel model = train_seq2seq(one, inv.asr, inv.tts, config, &result);
  CHECK(result.epoch_loss.back() < 0.05);
  CHECK(model.decode(one[0].asr) == one[0].tts);
}

TEST_CASE("memorizes a toy corpus") {
  const LocaleInventory& inv = inventory();
  const auto pairs = toy_pairs(50, 11);
  Seq2SeqConfig config;
  config.epochs = 200;
  Seq2SeqTrainResult result;
  const Seq2SeqModel model = train_seq2seq(pairs, inv.asr, inv.tts, config, &result);
  CHECK(result.epoch_loss.back() < 0.5 * result.epoch_loss.front());
  std::size_t exact = 0;
  for (const auto& p : pairs) exact += model.decode(p.asr) == p.tts;
  CHECK(exact >= 48);
  CHECK(model.decode(pairs[0].asr) == model.decode(pairs[0].asr));

  // c0..c3 and their allophones translate to the same TTS consonant.
  const EmbeddingTable src = model.source_embeddings();
  double mean = 0.0;
  std::size_t count = 0;
  const auto rows = static_cast<Eigen::Index>(inv.asr.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = i + 1; j < rows; ++j) {
      mean += cosine(src.vectors.row(i), src.vectors.row(j));
      ++count;
    }
  }
  mean /= static_cast<double>(count);
  for (int c = 0; c < kAllophones; ++c) {
    const double sim = cosine(src.vectors.row(c), src.vectors.row(kTtsSymbols + c));
    INFO("consonant " << c);
    CHECK(sim > mean);
  }

  const auto path = std::filesystem::temp_directory_path() / "pronlearn_s2s.ckpt";
  save_seq2seq(path, model);
  const Seq2SeqModel loaded = load_seq2seq(path);
  CHECK(extract_embeddings(loaded) == extract_embeddings(model));
  CHECK(loaded.decode(pairs[3].asr) == model.decode(pairs[3].asr));
  std::filesystem::remove(path);
}

TEST_CASE("training input errors") {
  const LocaleInventory& inv = inventory();
  const Seq2SeqConfig config;
  CHECK_THROWS_AS(train_seq2seq({}, inv.asr, inv.tts, config), InvalidArgument);
  const std::vector<SequencePair> long_pair = {
      {PhonemeSequence{inv.asr.id(), std::vector<int>(33, 1)}, parse_sequence(inv.tts, "C1")}};
  CHECK_THROWS_AS(train_seq2seq(long_pair, inv.asr, inv.tts, config), InvalidArgument);
  Seq2SeqConfig bad;
  bad.hidden = 99;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("pair corpus file") {
  const LocaleInventory& inv = inventory();
  const auto pairs = toy_pairs(4, 2);
  const auto path = std::filesystem::temp_directory_path() / "pronlearn_pairs.tsv";
  write_pair_corpus(path, pairs, inv.asr, inv.tts);
  const auto back = read_pair_corpus(path, inv.asr, inv.tts);
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back[i].asr == pairs[i].asr);
    CHECK(back[i].tts == pairs[i].tts);
  }
  std::ofstream(path) << "c0 v0\tC0 V0\nc0 zz\tC0\n";
  CHECK_THROWS_AS(read_pair_corpus(path, inv.asr, inv.tts), IoError);
  std::filesystem::remove(path);
}
