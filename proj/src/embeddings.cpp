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

#include "pronlearn/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "io_util.hpp"
#include "json.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/nn/checkpoint.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kModelKind = "seq2seq";

Json config_to_json(const Seq2SeqConfig& c) {
  return Json{{"embedding_dim", c.embedding_dim}, {"hidden", c.hidden},
              {"heads", c.heads},                 {"max_length", c.max_length},
              {"epochs", c.epochs},               {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate}, {"seed", c.seed}};
}

Seq2SeqConfig config_from_json(const Json& j) {
  Seq2SeqConfig c;
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.max_length = j.at("max_length").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

Eigen::MatrixXd to_matrix(const nn::Tensor& t) { return t.to_eigen(); }

}  // namespace

void Seq2SeqConfig::validate() const {
  if (embedding_dim == 0 || hidden == 0) throw InvalidArgument("seq2seq: empty layer");
  if (heads == 0 || hidden % heads != 0) {
    throw InvalidArgument("seq2seq: hidden must be divisible by heads");
  }
  if (max_length == 0) throw InvalidArgument("seq2seq: max_length must be >= 1");
  if (batch_size == 0) throw InvalidArgument("seq2seq: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("seq2seq: learning_rate must be > 0");
}

Eigen::MatrixXd embed_sequence(const EmbeddingTable& table, const PhonemeSequence& seq) {
  if (seq.phoneset != table.phoneset) {
    throw PhonesetMismatch("embedding table is for '" + table.phoneset + "', sequence is over '" +
                           seq.phoneset + "'");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(seq.size()), table.vectors.cols());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const int s = seq.items[i];
    if (s < 0 || s >= table.vectors.rows() - 2) {
      throw InvalidArgument("symbol index " + std::to_string(s) + " outside the embedding table");
    }
    out.row(static_cast<Eigen::Index>(i)) = table.vectors.row(s);
  }
  return out;
}

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig& config, Phoneset source, Phoneset target)
    : config_(config), source_(std::move(source)), target_(std::move(target)) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, 1));
  const std::size_t e = config_.embedding_dim, h = config_.hidden;
  const std::size_t vs = source_.size() + 2, vt = target_.size() + 2;
  params_.add_uniform("source_embedding", {vs, e}, vs, e, rng);
  params_.add_uniform("target_embedding", {vt, e}, vt, e, rng);
  nn::LstmCell(params_, "encoder", e, h, rng);
  nn::MultiHeadAttention(params_, "self_attention", h, config_.heads, rng);
  nn::LstmCell(params_, "decoder", e, h, rng);
  nn::MultiHeadAttention(params_, "cross_attention", h, config_.heads, rng);
  nn::Dense(params_, "output", 2 * h, vt, rng);
  bind();
}

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig& config, Phoneset source, Phoneset target,
                           nn::ParameterSet params)
    : config_(config),
      source_(std::move(source)),
      target_(std::move(target)),
      params_(std::move(params)) {
  config_.validate();
  bind();
}

void Seq2SeqModel::bind() {
  source_table_ = &params_.get("source_embedding");
  target_table_ = &params_.get("target_embedding");
  encoder_ = nn::LstmCell::bind(params_, "encoder");
  self_attention_ = nn::MultiHeadAttention::bind(params_, "self_attention", config_.heads);
  decoder_ = nn::LstmCell::bind(params_, "decoder");
  cross_attention_ = nn::MultiHeadAttention::bind(params_, "cross_attention", config_.heads);
  output_ = nn::Dense::bind(params_, "output");
  const nn::Shape expect_source = {source_.size() + 2, config_.embedding_dim};
  const nn::Shape expect_target = {target_.size() + 2, config_.embedding_dim};
  if (source_table_->value.shape() != expect_source ||
      target_table_->value.shape() != expect_target ||
      encoder_.input_dim() != config_.embedding_dim || encoder_.hidden() != config_.hidden ||
      decoder_.input_dim() != config_.embedding_dim || decoder_.hidden() != config_.hidden ||
      output_.in_dim() != 2 * config_.hidden || output_.out_dim() != target_.size() + 2) {
    throw InvalidArgument("seq2seq parameters do not match the configuration");
  }
}

void Seq2SeqModel::check_source(const PhonemeSequence& asr) const {
  if (asr.phoneset != source_.id()) {
    throw PhonesetMismatch("model reads '" + source_.id() + "', got '" + asr.phoneset + "'");
  }
  validate(source_, asr);
  if (asr.size() > config_.max_length) {
    throw InvalidArgument("sequence of length " + std::to_string(asr.size()) +
                          " exceeds max_length " + std::to_string(config_.max_length));
  }
}

nn::Var Seq2SeqModel::encode(nn::Graph& g, const PhonemeSequence& asr,
                             nn::LstmState* final_state) const {
  check_source(asr);
  std::vector<int> ids;
  ids.reserve(asr.size() + 2);
  ids.push_back(source_bos());
  ids.insert(ids.end(), asr.items.begin(), asr.items.end());
  ids.push_back(source_eos());
  const nn::Var emb = nn::gather_rows(g.param(*source_table_), ids);
  nn::LstmState state = encoder_.zero_state(g, 1);
  std::vector<nn::Var> states;
  states.reserve(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    state = encoder_.step(g, nn::slice_rows(emb, t, 1), state);
    states.push_back(state.h);
  }
  if (final_state != nullptr) *final_state = state;
  const nn::Var hidden = nn::concat_rows(states);
  return nn::add(hidden, self_attention_(g, hidden, hidden));
}

nn::Var Seq2SeqModel::loss(nn::Graph& g, const SequencePair& pair) const {
  if (pair.tts.phoneset != target_.id()) {
    throw PhonesetMismatch("model writes '" + target_.id() + "', got '" + pair.tts.phoneset + "'");
  }
  validate(target_, pair.tts);
  if (pair.tts.size() > config_.max_length) {
    throw InvalidArgument("target sequence exceeds max_length");
  }
  nn::LstmState state;
  const nn::Var memory = encode(g, pair.asr, &state);
  std::vector<int> inputs = {target_bos()};
  inputs.insert(inputs.end(), pair.tts.items.begin(), pair.tts.items.end());
  std::vector<int> targets = pair.tts.items;
  targets.push_back(target_eos());
  const nn::Var emb = nn::gather_rows(g.param(*target_table_), inputs);
  std::vector<nn::Var> states;
  states.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    state = decoder_.step(g, nn::slice_rows(emb, t, 1), state);
    states.push_back(state.h);
  }
  const nn::Var decoded = nn::concat_rows(states);
  const nn::Var parts[2] = {decoded, cross_attention_(g, decoded, memory)};
  return nn::softmax_cross_entropy(output_(g, nn::concat_cols(parts)), targets);
}

Eigen::MatrixXd Seq2SeqModel::encoder_outputs(const PhonemeSequence& asr) const {
  nn::Graph g(false);
  const nn::Var out = encode(g, asr, nullptr);
  // Drop the marker positions.
  return to_matrix(out.value()).middleRows(1, static_cast<Eigen::Index>(asr.size()));
}

Seq2SeqTrace Seq2SeqModel::trace(const PhonemeSequence& asr) const {
  nn::Graph g(false);
  nn::LstmState state;
  const nn::Var memory = encode(g, asr, &state);
  Seq2SeqTrace out;
  out.output = PhonemeSequence{target_.id(), {}};
  int previous = target_bos();
  for (std::size_t step = 0; step <= config_.max_length; ++step) {
    const int ids[1] = {previous};
    state = decoder_.step(g, nn::gather_rows(g.param(*target_table_), ids), state);
    std::vector<nn::Var> weights;
    const nn::Var parts[2] = {state.h, cross_attention_(g, state.h, memory, &weights)};
    const nn::Tensor& logits = output_(g, nn::concat_cols(parts)).value();
    std::vector<Eigen::VectorXd> step_weights;
    for (const nn::Var& w : weights) {
      const nn::Tensor& t = w.value();
      step_weights.push_back(Eigen::Map<const Eigen::VectorXd>(t.data(),
                                                               static_cast<Eigen::Index>(t.size())));
    }
    out.attention.push_back(std::move(step_weights));
    // The begin marker is never emitted.
    int best = 0;
    for (int v = 1; v < static_cast<int>(logits.size()); ++v) {
      if (v == target_bos()) continue;
      if (logits[static_cast<std::size_t>(v)] > logits[static_cast<std::size_t>(best)]) best = v;
    }
    if (best == target_eos() || step == config_.max_length) break;
    out.output.items.push_back(best);
    previous = best;
  }
  return out;
}

PhonemeSequence Seq2SeqModel::decode(const PhonemeSequence& asr) const { return trace(asr).output; }

EmbeddingTable Seq2SeqModel::source_embeddings() const {
  return {source_.id(), to_matrix(source_table_->value)};
}

EmbeddingTable Seq2SeqModel::target_embeddings() const {
  return {target_.id(), to_matrix(target_table_->value)};
}

Seq2SeqModel train_seq2seq(std::span<const SequencePair> pairs, const Phoneset& source,
                           const Phoneset& target, const Seq2SeqConfig& config,
                           Seq2SeqTrainResult* result) {
  if (pairs.empty()) throw InvalidArgument("train_seq2seq: empty corpus");
  Seq2SeqModel model(config, source, target);
  for (const auto& p : pairs) {
    if (p.asr.size() > config.max_length || p.tts.size() > config.max_length) {
      throw InvalidArgument("train_seq2seq: sequence exceeds max_length " +
                            std::to_string(config.max_length));
    }
  }
  nn::ParameterSet& params = model.parameters();
  nn::Adam adam;
  adam.learning_rate = config.learning_rate;
  Rng rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  Seq2SeqTrainResult r;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      nn::Graph g;
      std::vector<nn::Var> losses;
      for (std::size_t i = start; i < end; ++i) losses.push_back(model.loss(g, pairs[order[i]]));
      const nn::Var batch = nn::mean(nn::concat_rows(losses));
      params.zero_grad();
      g.backward(batch);
      adam.step(params);
      total += batch.value()[0] * static_cast<double>(end - start);
    }
    r.epoch_loss.push_back(total / static_cast<double>(pairs.size()));
  }
  if (result != nullptr) *result = std::move(r);
  return model;
}

std::pair<EmbeddingTable, EmbeddingTable> extract_embeddings(const Seq2SeqModel& model) {
  return {model.source_embeddings(), model.target_embeddings()};
}

void save_seq2seq(const std::filesystem::path& path, const Seq2SeqModel& model) {
  nn::Checkpoint ckpt;
  ckpt.metadata = Json{{"kind", kModelKind},
                       {"version", 1},
                       {"config", config_to_json(model.config())},
                       {"source", model.source().serialize()},
                       {"target", model.target().serialize()}}
                      .dump();
  nn::append_parameters(ckpt, model.parameters());
  nn::save_checkpoint(path, ckpt);
}

Seq2SeqModel load_seq2seq(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  Json meta;
  try {
    meta = Json::parse(ckpt.metadata);
    if (meta.at("kind").get<std::string>() != kModelKind) {
      throw IoError(path.string() + ": not a seq2seq checkpoint");
    }
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": bad metadata: " + e.what());
  }
  nn::ParameterSet params;
  nn::load_parameters(ckpt, params);
  try {
    return Seq2SeqModel(config_from_json(meta.at("config")),
                        Phoneset::parse(meta.at("source").get<std::string>()),
                        Phoneset::parse(meta.at("target").get<std::string>()), std::move(params));
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": bad metadata: " + e.what());
  }
}

std::vector<SequencePair> read_pair_corpus(const std::filesystem::path& path,
                                           const Phoneset& source, const Phoneset& target) {
  const std::string text = detail::read_file(path);
  std::vector<SequencePair> pairs;
  std::size_t line_no = 0;
  for (const std::string_view line : detail::split_lines(text)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_char(line, '\t');
    try {
      if (fields.size() != 2) throw InvalidArgument("expected two tab-separated fields");
      pairs.push_back({parse_sequence(source, fields[0]), parse_sequence(target, fields[1])});
    } catch (const InvalidArgument& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

void write_pair_corpus(const std::filesystem::path& path, std::span<const SequencePair> pairs,
                       const Phoneset& source, const Phoneset& target) {
  std::string out;
  for (const auto& p : pairs) {
    out += format_sequence(source, p.asr) + "\t" + format_sequence(target, p.tts) + "\n";
  }
  detail::write_file(path, out);
}

}  // namespace pronlearn
