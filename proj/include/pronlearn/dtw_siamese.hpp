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

#ifndef PRONLEARN_DTW_SIAMESE_HPP_
#define PRONLEARN_DTW_SIAMESE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pronlearn/audio.hpp"
#include "pronlearn/dtw.hpp"
#include "pronlearn/nn/graph.hpp"
#include "pronlearn/nn/layers.hpp"
#include "pronlearn/nn/parameters.hpp"
#include "pronlearn/phoneme.hpp"

namespace pronlearn {

struct EncoderConfig {
  std::size_t n_mels = 40;
  std::size_t window = 8;  // frames per window
  std::size_t hidden = 32;
  std::size_t output_dim = 32;
  // Log-Mel inputs enter the LSTM as (x - input_offset) * input_scale.
  double input_offset = -5.0;
  double input_scale = 1.0 / 6.0;
  // Identity passthrough of the flattened raw window.
  bool bypass = false;

  std::size_t embedding_dim() const { return bypass ? n_mels * window : output_dim; }
  void validate() const;
};

// A frame window as [window, n_mels]: row k is frame start + k, zero past
// the end of the spectrogram.
Eigen::MatrixXd frame_window(const Eigen::MatrixXd& log_mel, std::size_t start, std::size_t window);

// Windows stacked for batched encoding: steps[k] is [batch, n_mels] and row b
// holds frame k of window b.
struct WindowBatch {
  std::vector<Eigen::MatrixXd> steps;

  std::size_t size() const { return steps.empty() ? 0 : static_cast<std::size_t>(steps[0].rows()); }
};

WindowBatch stack_windows(std::span<const Eigen::MatrixXd> windows);
// One window per frame, stride 1.
WindowBatch spectrogram_windows(const Eigen::MatrixXd& log_mel, std::size_t window);

// f_W: LSTM over the frames of a window, attention pooling over its hidden
// states, then a dense projection. Both branches of a comparison share it.
class TwinEncoder {
 public:
  TwinEncoder(const EncoderConfig& config, std::uint64_t seed);
  // Rebinds to loaded parameters.
  TwinEncoder(const EncoderConfig& config, nn::ParameterSet params);
  static TwinEncoder identity(std::size_t n_mels, std::size_t window);

  TwinEncoder(TwinEncoder&&) = default;
  TwinEncoder& operator=(TwinEncoder&&) = default;

  const EncoderConfig& config() const { return config_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  nn::Var forward(nn::Graph& g, const WindowBatch& batch) const;  // [batch, dim]
  Eigen::MatrixXd encode(const WindowBatch& batch) const;         // [batch, dim]

 private:
  void bind();

  EncoderConfig config_;
  nn::ParameterSet params_;
  nn::LstmCell lstm_;
  nn::Dense attention_;
  nn::Dense output_;
};

struct Triplet {
  Eigen::MatrixXd anchor;    // [window, n_mels]
  Eigen::MatrixXd positive;  // same pronunciation as the anchor
  Eigen::MatrixXd negative;  // a different pronunciation
};

struct MetricTrainConfig {
  double rho = 1.0;
  double u_bound = 1.0;
  double l_bound = 3.0;
  double eta = 0.01;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 7;
  EncoderConfig encoder;

  void validate() const;
};

struct DtwSiameseModel {
  TwinEncoder encoder;
  Eigen::MatrixXd metric;  // A
  MetricTrainConfig config;

  static DtwSiameseModel identity(std::size_t n_mels, std::size_t window);
};

// rho + D_A(fx, fy) - D_A(fx, fz).
double triplet_loss(const Eigen::MatrixXd& metric, const Eigen::VectorXd& fx,
                    const Eigen::VectorXd& fy, const Eigen::VectorXd& fz, double rho);
double triplet_loss(const DtwSiameseModel& model, const Triplet& t);

// Sum of triplet losses over a batch with A held constant. With `hinge`,
// triplets whose loss is not positive contribute nothing.
nn::Var triplet_objective(nn::Graph& g, const TwinEncoder& encoder, const Eigen::MatrixXd& metric,
                          std::span<const Triplet> triplets, double rho, bool hinge);

struct MetricUpdateEvent {
  std::size_t step = 0;
  double eta = 0.0;
  bool accepted = true;
  double min_eigenvalue = 0.0;
  double symmetry_error = 0.0;
  const Eigen::MatrixXd* metric = nullptr;  // A after the step; valid during the callback
};

struct MetricEpoch {
  double mean_loss = 0.0;           // mean of max(0, loss) seen during the epoch
  double satisfied_fraction = 0.0;  // triplets with loss <= 0
  std::size_t metric_updates = 0;
};

struct MetricTrainResult {
  DtwSiameseModel model;
  std::vector<MetricEpoch> epochs;
};

using MetricObserver = std::function<void(const MetricUpdateEvent&)>;

// The encoder that training starts from.
TwinEncoder initial_encoder(const MetricTrainConfig& config);

// Alternates, per batch, an SGD step on W (A fixed) with closed-form
// updates of A (W fixed), one per active triplet.
MetricTrainResult train_dtw_siamese(std::span<const Triplet> triplets,
                                    const MetricTrainConfig& config,
                                    const MetricObserver& observer = {});

// Fraction of triplets with D_A(fx, fz) >= D_A(fx, fy) + rho.
double constraint_satisfaction(const DtwSiameseModel& model, std::span<const Triplet> triplets);

struct Recording {
  const MelSpectrogram* mel = nullptr;
  std::string pronunciation;  // recordings with equal keys say the same thing
  std::string pool;           // negatives come from the same pool when possible
};

struct TripletSamplerConfig {
  std::size_t per_pair = 4;
  std::size_t window = 8;
  std::uint64_t seed = 7;
};

// Anchor and positive windows are matched along the baseline FastDTW path
// between two recordings of one pronunciation; the negative is a random
// window of a recording with another pronunciation.
std::vector<Triplet> sample_triplets(std::span<const Recording> recordings,
                                     const TripletSamplerConfig& config);

// Frame embeddings G f_W(window_t) as columns, so that squared Euclidean
// distance between columns is D_A.
Eigen::MatrixXd embed_spectrogram(const DtwSiameseModel& model, const MelSpectrogram& mel);

DtwResult learned_dtw(const MelSpectrogram& a, const MelSpectrogram& b,
                      const DtwSiameseModel& model);
// Path-length normalized learned_dtw cost over precomputed embeddings.
double learned_dtw_score(const Eigen::MatrixXd& embedded_a, const Eigen::MatrixXd& embedded_b);

DetectionVerdict dtw_siamese_detect(const MelSpectrogram& user, const MelSpectrogram& tts,
                                    const DtwSiameseModel& model, double threshold);

void save_dtw_siamese(const std::filesystem::path& path, const DtwSiameseModel& model);
DtwSiameseModel load_dtw_siamese(const std::filesystem::path& path);

}  // namespace pronlearn

#endif  // PRONLEARN_DTW_SIAMESE_HPP_
