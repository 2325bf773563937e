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

#include "pronlearn/mel_siamese.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "json.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/nn/checkpoint.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kModelKind = "mel-siamese";

Json config_to_json(const ConvSiameseConfig& c) {
  return Json{{"n_mels", c.n_mels},
              {"n_frames", c.n_frames},
              {"filters", c.filters},
              {"hidden", c.hidden},
              {"input_offset", c.input_offset},
              {"input_scale", c.input_scale},
              {"seed", c.seed},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate}};
}

ConvSiameseConfig config_from_json(const Json& j) {
  ConvSiameseConfig c;
  c.n_mels = j.at("n_mels").get<std::size_t>();
  c.n_frames = j.at("n_frames").get<std::size_t>();
  c.filters = j.at("filters").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.input_offset = j.at("input_offset").get<double>();
  c.input_scale = j.at("input_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  return c;
}

constexpr std::size_t kReduction = ConvSiameseConfig::kPool * ConvSiameseConfig::kPool *
                                   ConvSiameseConfig::kPool;

}  // namespace

std::size_t ConvSiameseConfig::feature_dim() const {
  return filters * (n_mels / kReduction) * (n_frames / kReduction);
}

void ConvSiameseConfig::validate() const {
  if (n_mels < kReduction || n_mels % kReduction != 0) {
    throw InvalidArgument("mel-siamese: n_mels must be a positive multiple of 8");
  }
  if (n_frames < kReduction || n_frames % kReduction != 0) {
    throw InvalidArgument("mel-siamese: n_frames must be a positive multiple of 8");
  }
  if (filters == 0 || hidden == 0) throw InvalidArgument("mel-siamese: empty layer");
  if (!(input_scale > 0.0) || !std::isfinite(input_offset)) {
    throw InvalidArgument("mel-siamese: bad input normalization");
  }
  if (batch_size == 0) throw InvalidArgument("mel-siamese: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("mel-siamese: learning_rate must be > 0");
}

Eigen::MatrixXd fit_frames(const Eigen::MatrixXd& log_mel, std::size_t n_frames) {
  if (n_frames == 0) throw InvalidArgument("fit_frames: n_frames must be >= 1");
  const auto target = static_cast<Eigen::Index>(n_frames);
  const Eigen::Index have = log_mel.cols();
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Constant(log_mel.rows(), target, std::log(kMelEnergyFloor));
  if (have >= target) {
    out = log_mel.middleCols((have - target) / 2, target);
  } else {
    out.middleCols((target - have) / 2, have) = log_mel;
  }
  return out;
}

ConvTwinNet::ConvTwinNet(const ConvSiameseConfig& config) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, 1));
  std::size_t channels = 1;
  for (std::size_t i = 0; i < 3; ++i) {
    conv_[i] = nn::Conv2d(params_, "conv" + std::to_string(i), channels, config_.filters,
                          ConvSiameseConfig::kKernels[i], rng);
    channels = config_.filters;
  }
  hidden_ = nn::Dense(params_, "hidden", 2 * config_.feature_dim(), config_.hidden, rng);
  output_ = nn::Dense(params_, "output", config_.hidden, 1, rng);
}

ConvTwinNet::ConvTwinNet(const ConvSiameseConfig& config, nn::ParameterSet params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  bind();
}

void ConvTwinNet::bind() {
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string name = "conv" + std::to_string(i);
    const nn::Shape& w = params_.get(name + ".weight").value.shape();
    if (w.size() != 4 || w[0] != config_.filters || w[1] != (i == 0 ? 1 : config_.filters) ||
        w[2] != ConvSiameseConfig::kKernels[i]) {
      throw InvalidArgument("mel-siamese parameters do not match the configuration");
    }
    conv_[i] = nn::Conv2d::bind(params_, name);
  }
  hidden_ = nn::Dense::bind(params_, "hidden");
  output_ = nn::Dense::bind(params_, "output");
  if (hidden_.in_dim() != 2 * config_.feature_dim() || hidden_.out_dim() != config_.hidden ||
      output_.in_dim() != config_.hidden || output_.out_dim() != 1) {
    throw InvalidArgument("mel-siamese parameters do not match the configuration");
  }
}

Eigen::MatrixXd ConvTwinNet::prepare(const MelSpectrogram& mel) const {
  if (mel.n_mels() != config_.n_mels) {
    throw InvalidArgument("mel-siamese: expected " + std::to_string(config_.n_mels) +
                          " mel bands, got " + std::to_string(mel.n_mels()));
  }
  return fit_frames(mel.log_mel, config_.n_frames);
}

nn::Var ConvTwinNet::tower(nn::Graph& g, const Eigen::MatrixXd& log_mel) const {
  if (static_cast<std::size_t>(log_mel.rows()) != config_.n_mels ||
      static_cast<std::size_t>(log_mel.cols()) != config_.n_frames) {
    throw InvalidArgument("mel-siamese: input must be n_mels x n_frames");
  }
  nn::Tensor input({1, config_.n_mels, config_.n_frames});
  nn::MatrixMap(input.data(), log_mel.rows(), log_mel.cols()) =
      ((log_mel.array() - config_.input_offset) * config_.input_scale).matrix();
  nn::Var x = g.constant(std::move(input));
  for (const auto& conv : conv_) {
    x = nn::max_pool2d(nn::relu(conv(g, x)), ConvSiameseConfig::kPool);
  }
  return nn::reshape(x, {1, config_.feature_dim()});
}

nn::Var ConvTwinNet::logit(nn::Graph& g, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b) const {
  const nn::Var parts[2] = {tower(g, a), tower(g, b)};
  return output_(g, nn::relu(hidden_(g, nn::concat_cols(parts))));
}

Eigen::VectorXd ConvTwinNet::features(const MelSpectrogram& mel) const {
  nn::Graph g(false);
  const nn::Tensor& t = tower(g, prepare(mel)).value();
  return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

double ConvTwinNet::score(const MelSpectrogram& a, const MelSpectrogram& b) const {
  nn::Graph g(false);
  const double z = logit(g, prepare(a), prepare(b)).value()[0];
  return 1.0 / (1.0 + std::exp(-z));
}

ConvTrainResult train_conv_siamese(ConvTwinNet& model, std::span<const MelPair> pairs) {
  const ConvSiameseConfig& config = model.config();
  if (pairs.empty()) throw InvalidArgument("train_conv_siamese: no pairs");
  bool any_same = false, any_diff = false;
  std::vector<Eigen::MatrixXd> inputs_a, inputs_b;
  for (const auto& p : pairs) {
    if (p.a == nullptr || p.b == nullptr) throw InvalidArgument("train_conv_siamese: null pair");
    for (const MelSpectrogram* m : {p.a, p.b}) {
      if (m->n_mels() != config.n_mels) {
        throw InvalidArgument("train_conv_siamese: spectrogram has the wrong number of mel bands");
      }
    }
    inputs_a.push_back(fit_frames(p.a->log_mel, config.n_frames));
    inputs_b.push_back(fit_frames(p.b->log_mel, config.n_frames));
    (p.same ? any_same : any_diff) = true;
  }
  if (!any_same || !any_diff) throw InvalidArgument("train_conv_siamese: need both classes");

  nn::ParameterSet& params = model.parameters();
  nn::Adam adam;
  adam.learning_rate = config.learning_rate;
  Rng rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  ConvTrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      nn::Graph g;
      std::vector<nn::Var> logits;
      std::vector<double> labels;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t k = order[i];
        logits.push_back(model.logit(g, inputs_a[k], inputs_b[k]));
        labels.push_back(pairs[k].same ? 1.0 : 0.0);
      }
      const nn::Var loss = nn::sigmoid_cross_entropy(nn::concat_rows(logits), labels);
      params.zero_grad();
      g.backward(loss);
      adam.step(params);
      total += loss.value()[0] * static_cast<double>(end - start);
    }
    result.epoch_loss.push_back(total / static_cast<double>(pairs.size()));
  }
  std::size_t correct = 0;
  for (const auto& p : pairs) correct += (model.score(*p.a, *p.b) > 0.5) == p.same;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(pairs.size());
  return result;
}

ConvTwinNet train_conv_siamese(std::span<const MelPair> pairs, const ConvSiameseConfig& config,
                               ConvTrainResult* result) {
  ConvTwinNet model(config);
  ConvTrainResult r = train_conv_siamese(model, pairs);
  if (result != nullptr) *result = std::move(r);
  return model;
}

double score_pair(const ConvTwinNet& model, const MelSpectrogram& a, const MelSpectrogram& b) {
  return model.score(a, b);
}

DetectionVerdict mel_siamese_detect(const ConvTwinNet& model, const MelSpectrogram& user,
                                    const MelSpectrogram& tts, double threshold) {
  return make_verdict(1.0 - model.score(user, tts), threshold);
}

void save_conv_siamese(const std::filesystem::path& path, const ConvTwinNet& model) {
  nn::Checkpoint ckpt;
  ckpt.metadata =
      Json{{"kind", kModelKind}, {"version", 1}, {"config", config_to_json(model.config())}}.dump();
  nn::append_parameters(ckpt, model.parameters());
  nn::save_checkpoint(path, ckpt);
}

ConvTwinNet load_conv_siamese(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  ConvSiameseConfig config;
  try {
    const Json meta = Json::parse(ckpt.metadata);
    if (meta.at("kind").get<std::string>() != kModelKind) {
      throw IoError(path.string() + ": not a mel-siamese checkpoint");
    }
    config = config_from_json(meta.at("config"));
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": bad metadata: " + e.what());
  }
  nn::ParameterSet params;
  nn::load_parameters(ckpt, params);
  return ConvTwinNet(config, std::move(params));
}

}  // namespace pronlearn
