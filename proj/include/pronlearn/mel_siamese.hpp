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

#ifndef PRONLEARN_MEL_SIAMESE_HPP_
#define PRONLEARN_MEL_SIAMESE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pronlearn/audio.hpp"
#include "pronlearn/nn/graph.hpp"
#include "pronlearn/nn/layers.hpp"
#include "pronlearn/nn/parameters.hpp"
#include "pronlearn/phoneme.hpp"

namespace pronlearn {

struct ConvSiameseConfig {
  std::size_t n_mels = 40;
  std::size_t n_frames = 64;
  std::size_t filters = 8;
  std::size_t hidden = 32;
  double input_offset = -5.0;
  double input_scale = 1.0 / 6.0;
  std::uint64_t seed = 7;

  // Training.
  std::size_t epochs = 100;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;

  static constexpr std::size_t kKernels[3] = {3, 5, 7};
  static constexpr std::size_t kPool = 2;

  std::size_t feature_dim() const;
  void validate() const;
};

// Center-crops or pads (with silence) the frame axis of a log-mel matrix to
// exactly `n_frames` columns.
Eigen::MatrixXd fit_frames(const Eigen::MatrixXd& log_mel, std::size_t n_frames);

// Two convolutional towers with one set of weights, followed by a dense head
// over [features(a), features(b)] that outputs P(same pronunciation).
class ConvTwinNet {
 public:
  explicit ConvTwinNet(const ConvSiameseConfig& config);
  ConvTwinNet(const ConvSiameseConfig& config, nn::ParameterSet params);

  ConvTwinNet(ConvTwinNet&&) = default;
  ConvTwinNet& operator=(ConvTwinNet&&) = default;

  const ConvSiameseConfig& config() const { return config_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  // `log_mel` must already be n_mels x n_frames.
  nn::Var tower(nn::Graph& g, const Eigen::MatrixXd& log_mel) const;  // [1, feature_dim]
  nn::Var logit(nn::Graph& g, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;

  Eigen::VectorXd features(const MelSpectrogram& mel) const;
  double score(const MelSpectrogram& a, const MelSpectrogram& b) const;

 private:
  void bind();
  Eigen::MatrixXd prepare(const MelSpectrogram& mel) const;

  ConvSiameseConfig config_;
  nn::ParameterSet params_;
  nn::Conv2d conv_[3];
  nn::Dense hidden_;
  nn::Dense output_;
};

struct MelPair {
  const MelSpectrogram* a = nullptr;
  const MelSpectrogram* b = nullptr;
  bool same = false;
};

struct ConvTrainResult {
  std::vector<double> epoch_loss;
  double accuracy = 0.0;  // on the training pairs, score > 0.5 means same
};

// Adam on mean binary cross-entropy.
ConvTrainResult train_conv_siamese(ConvTwinNet& model, std::span<const MelPair> pairs);
ConvTwinNet train_conv_siamese(std::span<const MelPair> pairs, const ConvSiameseConfig& config,
                               ConvTrainResult* result = nullptr);

double score_pair(const ConvTwinNet& model, const MelSpectrogram& a, const MelSpectrogram& b);

// Mispronounced when 1 - score(user, tts) exceeds the threshold.
DetectionVerdict mel_siamese_detect(const ConvTwinNet& model, const MelSpectrogram& user,
                                    const MelSpectrogram& tts, double threshold);

void save_conv_siamese(const std::filesystem::path& path, const ConvTwinNet& model);
ConvTwinNet load_conv_siamese(const std::filesystem::path& path);

}  // namespace pronlearn

#endif  // PRONLEARN_MEL_SIAMESE_HPP_
