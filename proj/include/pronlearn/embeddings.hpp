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

#ifndef PRONLEARN_EMBEDDINGS_HPP_
#define PRONLEARN_EMBEDDINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pronlearn/nn/graph.hpp"
#include "pronlearn/nn/layers.hpp"
#include "pronlearn/nn/parameters.hpp"
#include "pronlearn/phoneme.hpp"

namespace pronlearn {

struct Seq2SeqConfig {
  std::size_t embedding_dim = 64;
  std::size_t hidden = 100;
  std::size_t heads = 2;
  std::size_t max_length = 32;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SequencePair {
  PhonemeSequence asr;
  PhonemeSequence tts;
};

// Rows are symbols of `phoneset` followed by the begin and end markers.
struct EmbeddingTable {
  std::string phoneset;
  Eigen::MatrixXd vectors;

  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  bool operator==(const EmbeddingTable&) const = default;
};

// len x E matrix, row i is the vector of seq.items[i].
Eigen::MatrixXd embed_sequence(const EmbeddingTable& table, const PhonemeSequence& seq);

struct Seq2SeqTrace {
  PhonemeSequence output;
  // Per decoder step and head: weights over encoder positions.
  std::vector<std::vector<Eigen::VectorXd>> attention;
};

// ASR -> TTS translation: an LSTM encoder with residual self-attention, and
// an LSTM decoder started from the encoder state that attends over the
// encoder outputs.
class Seq2SeqModel {
 public:
  Seq2SeqModel(const Seq2SeqConfig& config, Phoneset source, Phoneset target);
  Seq2SeqModel(const Seq2SeqConfig& config, Phoneset source, Phoneset target,
               nn::ParameterSet params);

  Seq2SeqModel(Seq2SeqModel&&) = default;
  Seq2SeqModel& operator=(Seq2SeqModel&&) = default;

  const Seq2SeqConfig& config() const { return config_; }
  const Phoneset& source() const { return source_; }
  const Phoneset& target() const { return target_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  int source_bos() const { return static_cast<int>(source_.size()); }
  int source_eos() const { return source_bos() + 1; }
  int target_bos() const { return static_cast<int>(target_.size()); }
  int target_eos() const { return target_bos() + 1; }

  nn::Var encode(nn::Graph& g, const PhonemeSequence& asr, nn::LstmState* final_state) const;
  // Mean cross-entropy of the target (then end marker) under teacher forcing.
  nn::Var loss(nn::Graph& g, const SequencePair& pair) const;

  Eigen::MatrixXd encoder_outputs(const PhonemeSequence& asr) const;  // len x hidden
  Seq2SeqTrace trace(const PhonemeSequence& asr) const;
  PhonemeSequence decode(const PhonemeSequence& asr) const;

  EmbeddingTable source_embeddings() const;
  EmbeddingTable target_embeddings() const;

 private:
  void bind();
  void check_source(const PhonemeSequence& asr) const;

  Seq2SeqConfig config_;
  Phoneset source_;
  Phoneset target_;
  nn::ParameterSet params_;
  nn::Parameter* source_table_ = nullptr;
  nn::Parameter* target_table_ = nullptr;
  nn::LstmCell encoder_;
  nn::MultiHeadAttention self_attention_;
  nn::LstmCell decoder_;
  nn::MultiHeadAttention cross_attention_;
  nn::Dense output_;
};

struct Seq2SeqTrainResult {
  std::vector<double> epoch_loss;
};

// Adam with teacher forcing over shuffled mini-batches.
Seq2SeqModel train_seq2seq(std::span<const SequencePair> pairs, const Phoneset& source,
                           const Phoneset& target, const Seq2SeqConfig& config,
                           Seq2SeqTrainResult* result = nullptr);

std::pair<EmbeddingTable, EmbeddingTable> extract_embeddings(const Seq2SeqModel& model);

void save_seq2seq(const std::filesystem::path& path, const Seq2SeqModel& model);
Seq2SeqModel load_seq2seq(const std::filesystem::path& path);

// One `asr<TAB>tts` pair per line, symbols separated by spaces.
std::vector<SequencePair> read_pair_corpus(const std::filesystem::path& path,
                                           const Phoneset& source, const Phoneset& target);
void write_pair_corpus(const std::filesystem::path& path, std::span<const SequencePair> pairs,
                       const Phoneset& source, const Phoneset& target);

}  // namespace pronlearn

#endif  // PRONLEARN_EMBEDDINGS_HPP_
