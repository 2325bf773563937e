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

#include "pronlearn/dtw_siamese.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "json.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/metric.hpp"
#include "pronlearn/nn/checkpoint.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kModelKind = "dtw-siamese";

void check_window_shape(const Eigen::MatrixXd& w, const EncoderConfig& config, const char* what) {
  if (static_cast<std::size_t>(w.rows()) != config.window ||
      static_cast<std::size_t>(w.cols()) != config.n_mels) {
    throw InvalidArgument(std::string(what) + ": window must be " + std::to_string(config.window) +
                          " x " + std::to_string(config.n_mels));
  }
}

Json encoder_to_json(const EncoderConfig& c) {
  return Json{{"n_mels", c.n_mels},           {"window", c.window},
              {"hidden", c.hidden},           {"output_dim", c.output_dim},
              {"input_offset", c.input_offset}, {"input_scale", c.input_scale},
              {"bypass", c.bypass}};
}

EncoderConfig encoder_from_json(const Json& j) {
  EncoderConfig c;
  c.n_mels = j.at("n_mels").get<std::size_t>();
  c.window = j.at("window").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.output_dim = j.at("output_dim").get<std::size_t>();
  c.input_offset = j.at("input_offset").get<double>();
  c.input_scale = j.at("input_scale").get<double>();
  c.bypass = j.at("bypass").get<bool>();
  return c;
}

Json train_config_to_json(const MetricTrainConfig& c) {
  return Json{{"rho", c.rho},
              {"u_bound", c.u_bound},
              {"l_bound", c.l_bound},
              {"eta", c.eta},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"encoder", encoder_to_json(c.encoder)}};
}

MetricTrainConfig train_config_from_json(const Json& j) {
  MetricTrainConfig c;
  c.rho = j.at("rho").get<double>();
  c.u_bound = j.at("u_bound").get<double>();
  c.l_bound = j.at("l_bound").get<double>();
  c.eta = j.at("eta").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.encoder = encoder_from_json(j.at("encoder"));
  return c;
}

// Anchors, then positives, then negatives.
WindowBatch triplet_windows(std::span<const Triplet> triplets) {
  std::vector<Eigen::MatrixXd> windows;
  windows.reserve(3 * triplets.size());
  for (const auto& t : triplets) windows.push_back(t.anchor);
  for (const auto& t : triplets) windows.push_back(t.positive);
  for (const auto& t : triplets) windows.push_back(t.negative);
  return stack_windows(windows);
}

struct BatchLoss {
  nn::Var total;
  std::vector<double> losses;  // per triplet, before the hinge
};

BatchLoss batch_objective(nn::Graph& g, const TwinEncoder& encoder, const Eigen::MatrixXd& metric,
                          std::span<const Triplet> triplets, double rho, bool hinge) {
  const std::size_t n = triplets.size();
  const nn::Var e = encoder.forward(g, triplet_windows(triplets));
  const nn::Var fx = nn::slice_rows(e, 0, n);
  const nn::Var fy = nn::slice_rows(e, n, n);
  const nn::Var fz = nn::slice_rows(e, 2 * n, n);
  const nn::Var diff = nn::sub(nn::quad_form_rows(nn::sub(fx, fy), metric),
                               nn::quad_form_rows(nn::sub(fx, fz), metric));
  BatchLoss out;
  nn::Tensor mask({n}, 1.0);
  std::size_t active = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double loss = rho + diff.value()[i];
    out.losses.push_back(loss);
    if (hinge && loss <= 0.0) {
      mask[i] = 0.0;
    } else {
      ++active;
    }
  }
  out.total = nn::add(nn::weighted_sum(diff, mask),
                      g.constant(nn::Tensor::vector({rho * static_cast<double>(active)})));
  return out;
}

}  // namespace

void EncoderConfig::validate() const {
  if (n_mels == 0 || window == 0) throw InvalidArgument("encoder: n_mels and window must be >= 1");
  if (!bypass && (hidden == 0 || output_dim == 0)) {
    throw InvalidArgument("encoder: hidden and output_dim must be >= 1");
  }
  if (!std::isfinite(input_offset) || !(input_scale > 0.0) || !std::isfinite(input_scale)) {
    throw InvalidArgument("encoder: input normalization must be finite with a positive scale");
  }
}

Eigen::MatrixXd frame_window(const Eigen::MatrixXd& log_mel, std::size_t start, std::size_t window) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(window), log_mel.rows());
  for (std::size_t k = 0; k < window; ++k) {
    const std::size_t t = start + k;
    if (t >= static_cast<std::size_t>(log_mel.cols())) break;
    out.row(static_cast<Eigen::Index>(k)) = log_mel.col(static_cast<Eigen::Index>(t)).transpose();
  }
  return out;
}

WindowBatch stack_windows(std::span<const Eigen::MatrixXd> windows) {
  if (windows.empty()) throw InvalidArgument("stack_windows: no windows");
  const Eigen::Index w = windows[0].rows();
  const Eigen::Index m = windows[0].cols();
  WindowBatch batch;
  batch.steps.assign(static_cast<std::size_t>(w),
                     Eigen::MatrixXd(static_cast<Eigen::Index>(windows.size()), m));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (windows[b].rows() != w || windows[b].cols() != m) {
      throw InvalidArgument("stack_windows: windows differ in shape");
    }
    for (Eigen::Index k = 0; k < w; ++k) {
      batch.steps[static_cast<std::size_t>(k)].row(static_cast<Eigen::Index>(b)) = windows[b].row(k);
    }
  }
  return batch;
}

WindowBatch spectrogram_windows(const Eigen::MatrixXd& log_mel, std::size_t window) {
  if (log_mel.cols() == 0) throw InvalidArgument("spectrogram_windows: empty spectrogram");
  if (window == 0) throw InvalidArgument("spectrogram_windows: window must be >= 1");
  const Eigen::Index t_count = log_mel.cols();
  WindowBatch batch;
  for (std::size_t k = 0; k < window; ++k) {
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(t_count, log_mel.rows());
    const Eigen::Index shift = static_cast<Eigen::Index>(k);
    if (shift < t_count) {
      step.topRows(t_count - shift) = log_mel.rightCols(t_count - shift).transpose();
    }
    batch.steps.push_back(std::move(step));
  }
  return batch;
}

TwinEncoder::TwinEncoder(const EncoderConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  if (!config_.bypass) {
    Rng rng(seed);
    lstm_ = nn::LstmCell(params_, "lstm", config_.n_mels, config_.hidden, rng);
    attention_ = nn::Dense(params_, "attention", config_.hidden, 1, rng);
    output_ = nn::Dense(params_, "output", config_.hidden, config_.output_dim, rng);
  }
}

TwinEncoder::TwinEncoder(const EncoderConfig& config, nn::ParameterSet params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  if (!config_.bypass) bind();
}

void TwinEncoder::bind() {
  lstm_ = nn::LstmCell::bind(params_, "lstm");
  attention_ = nn::Dense::bind(params_, "attention");
  output_ = nn::Dense::bind(params_, "output");
  if (lstm_.input_dim() != config_.n_mels || lstm_.hidden() != config_.hidden ||
      output_.out_dim() != config_.output_dim || attention_.out_dim() != 1) {
    throw InvalidArgument("encoder parameters do not match the configuration");
  }
}

TwinEncoder TwinEncoder::identity(std::size_t n_mels, std::size_t window) {
  EncoderConfig config;
  config.n_mels = n_mels;
  config.window = window;
  config.bypass = true;
  return TwinEncoder(config, 0);
}

nn::Var TwinEncoder::forward(nn::Graph& g, const WindowBatch& batch) const {
  if (batch.steps.size() != config_.window) throw InvalidArgument("encoder: wrong window length");
  for (const auto& step : batch.steps) {
    if (static_cast<std::size_t>(step.cols()) != config_.n_mels) {
      throw InvalidArgument("encoder: expected " + std::to_string(config_.n_mels) + " Mel bands");
    }
  }
  if (config_.bypass) {
    std::vector<nn::Var> parts;
    for (const auto& step : batch.steps) parts.push_back(g.constant(nn::Tensor::from_eigen(step)));
    return parts.size() == 1 ? parts[0] : nn::concat_cols(parts);
  }

  nn::LstmState state = lstm_.zero_state(g, batch.size());
  std::vector<nn::Var> hidden, scores;
  for (const auto& step : batch.steps) {
    const Eigen::MatrixXd x = (step.array() - config_.input_offset) * config_.input_scale;
    state = lstm_.step(g, g.constant(nn::Tensor::from_eigen(x)), state);
    hidden.push_back(state.h);
    scores.push_back(attention_(g, state.h));
  }
  const nn::Var weights = nn::softmax_rows(nn::concat_cols(scores));
  nn::Var pooled = nn::mul_col(hidden[0], nn::slice_cols(weights, 0, 1));
  for (std::size_t k = 1; k < hidden.size(); ++k) {
    pooled = nn::add(pooled, nn::mul_col(hidden[k], nn::slice_cols(weights, k, 1)));
  }
  return output_(g, pooled);
}

Eigen::MatrixXd TwinEncoder::encode(const WindowBatch& batch) const {
  nn::Graph g(false);
  return forward(g, batch).value().to_eigen();
}

void MetricTrainConfig::validate() const {
  if (!(rho > 0.0)) throw InvalidArgument("metric config: rho must be > 0");
  if (!(rho < l_bound - u_bound)) {
    throw InvalidArgument("metric config: need 0 < rho < l_bound - u_bound");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("metric config: eta must be > 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("metric config: learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidArgument("metric config: momentum must be in [0, 1)");
  }
  if (batch_size == 0) throw InvalidArgument("metric config: batch_size must be >= 1");
  encoder.validate();
}

DtwSiameseModel DtwSiameseModel::identity(std::size_t n_mels, std::size_t window) {
  TwinEncoder encoder = TwinEncoder::identity(n_mels, window);
  MetricTrainConfig config;
  config.encoder = encoder.config();
  const auto dim = static_cast<Eigen::Index>(encoder.config().embedding_dim());
  return DtwSiameseModel{std::move(encoder), Eigen::MatrixXd::Identity(dim, dim), config};
}

double triplet_loss(const Eigen::MatrixXd& metric, const Eigen::VectorXd& fx,
                    const Eigen::VectorXd& fy, const Eigen::VectorXd& fz, double rho) {
  return rho + mahalanobis(metric, fx, fy) - mahalanobis(metric, fx, fz);
}

double triplet_loss(const DtwSiameseModel& model, const Triplet& t) {
  const std::vector<Triplet> one{t};
  const Eigen::MatrixXd e = model.encoder.encode(triplet_windows(one));
  return triplet_loss(model.metric, e.row(0).transpose(), e.row(1).transpose(),
                      e.row(2).transpose(), model.config.rho);
}

nn::Var triplet_objective(nn::Graph& g, const TwinEncoder& encoder, const Eigen::MatrixXd& metric,
                          std::span<const Triplet> triplets, double rho, bool hinge) {
  if (triplets.empty()) throw InvalidArgument("triplet_objective: no triplets");
  return batch_objective(g, encoder, metric, triplets, rho, hinge).total;
}

TwinEncoder initial_encoder(const MetricTrainConfig& config) {
  return TwinEncoder(config.encoder, derive_seed(config.seed, 1));
}

MetricTrainResult train_dtw_siamese(std::span<const Triplet> triplets,
                                    const MetricTrainConfig& config,
                                    const MetricObserver& observer) {
  config.validate();
  if (config.encoder.bypass) throw InvalidArgument("metric training needs a trainable encoder");
  if (triplets.empty()) throw InvalidArgument("metric training: no triplets");
  bool degenerate = true;
  for (const auto& t : triplets) {
    check_window_shape(t.anchor, config.encoder, "triplet anchor");
    check_window_shape(t.positive, config.encoder, "triplet positive");
    check_window_shape(t.negative, config.encoder, "triplet negative");
    if (t.anchor != t.positive || t.anchor != t.negative) degenerate = false;
  }
  if (degenerate) throw InvalidArgument("metric training: all triplets are degenerate");

  const auto dim = static_cast<Eigen::Index>(config.encoder.output_dim);
  MetricTrainResult result{
      DtwSiameseModel{initial_encoder(config),
                      Eigen::MatrixXd::Identity(dim, dim), config},
      {}};
  DtwSiameseModel& model = result.model;
  nn::ParameterSet& params = model.encoder.parameters();
  const nn::Sgd sgd{config.learning_rate, config.momentum};

  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, 2));
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    MetricEpoch stats;
    double loss_sum = 0.0;
    std::size_t satisfied = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Triplet> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(triplets[order[k]]);

      params.zero_grad();
      nn::Graph g;
      const BatchLoss bl = batch_objective(g, model.encoder, model.metric, batch, config.rho, true);
      bool any_active = false;
      for (double l : bl.losses) {
        if (!std::isfinite(l)) throw NumericError("metric training: non-finite triplet loss");
        if (l > 0.0) {
          loss_sum += l;
          any_active = true;
        } else {
          ++satisfied;
        }
      }
      if (!any_active) continue;
      g.backward(bl.total);
      sgd.step(params);

      const Eigen::MatrixXd e = model.encoder.encode(triplet_windows(batch));
      const auto n = static_cast<Eigen::Index>(batch.size());
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd fx = e.row(i).transpose();
        const Eigen::VectorXd fy = e.row(n + i).transpose();
        const Eigen::VectorXd fz = e.row(2 * n + i).transpose();
        if (triplet_loss(model.metric, fx, fy, fz, config.rho) <= 0.0) continue;
        MetricUpdate upd = update_metric(model.metric, fx - fy, fx - fz, config.eta);
        if (upd.accepted) {
          model.metric = std::move(upd.metric);
          ++stats.metric_updates;
        }
        if (observer) {
          observer(MetricUpdateEvent{step, upd.eta, upd.accepted, min_eigenvalue(model.metric),
                                     symmetry_error(model.metric), &model.metric});
        }
        ++step;
      }
    }
    stats.mean_loss = loss_sum / static_cast<double>(triplets.size());
    stats.satisfied_fraction = static_cast<double>(satisfied) / static_cast<double>(triplets.size());
    result.epochs.push_back(stats);
  }
  return result;
}

double constraint_satisfaction(const DtwSiameseModel& model, std::span<const Triplet> triplets) {
  if (triplets.empty()) throw InvalidArgument("constraint_satisfaction: no triplets");
  const Eigen::MatrixXd e = model.encoder.encode(triplet_windows(triplets));
  const auto n = static_cast<Eigen::Index>(triplets.size());
  std::size_t ok = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pos = mahalanobis(model.metric, e.row(i).transpose(), e.row(n + i).transpose());
    const double neg = mahalanobis(model.metric, e.row(i).transpose(), e.row(2 * n + i).transpose());
    if (neg >= pos + model.config.rho) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

std::vector<Triplet> sample_triplets(std::span<const Recording> recordings,
                                     const TripletSamplerConfig& config) {
  if (config.window == 0 || config.per_pair == 0) {
    throw InvalidArgument("triplet sampler: window and per_pair must be >= 1");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  std::map<std::string, std::vector<std::size_t>> pools;
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    if (recordings[r].mel == nullptr) throw InvalidArgument("triplet sampler: missing spectrogram");
    if (recordings[r].mel->n_mels() != recordings.front().mel->n_mels()) {
      throw InvalidArgument("triplet sampler: n_mels mismatch");
    }
    groups[recordings[r].pronunciation].push_back(r);
    pools[recordings[r].pool].push_back(r);
  }
  if (groups.size() < 2) throw InvalidArgument("triplet sampler: need two distinct pronunciations");

  Rng rng(config.seed);
  auto draw_negative = [&](std::size_t anchor) {
    const std::string& key = recordings[anchor].pronunciation;
    const auto& pool = pools[recordings[anchor].pool];
    for (int tries = 0; tries < 64; ++tries) {
      const std::size_t r = pool[rng.index(pool.size())];
      if (recordings[r].pronunciation != key) return r;
    }
    for (;;) {
      const std::size_t r = rng.index(recordings.size());
      if (recordings[r].pronunciation != key) return r;
    }
  };

  std::vector<Triplet> out;
  for (const auto& [key, members] : groups) {
    for (std::size_t p = 0; p < members.size(); ++p) {
      for (std::size_t q = p + 1; q < members.size(); ++q) {
        const MelSpectrogram& a = *recordings[members[p]].mel;
        const MelSpectrogram& b = *recordings[members[q]].mel;
        const WarpPath path = fast_dtw(a.log_mel, b.log_mel, kDefaultFastDtwRadius, euclidean_distance).path;
        for (std::size_t k = 0; k < config.per_pair; ++k) {
          auto [i, j] = path[rng.index(path.size())];
          const bool swap = rng.bernoulli(0.5);
          const std::size_t anchor_rec = swap ? members[q] : members[p];
          if (swap) std::swap(i, j);
          const MelSpectrogram& x = swap ? b : a;
          const MelSpectrogram& y = swap ? a : b;
          const std::size_t neg = draw_negative(anchor_rec);
          const MelSpectrogram& z = *recordings[neg].mel;
          out.push_back(Triplet{frame_window(x.log_mel, i, config.window),
                                frame_window(y.log_mel, j, config.window),
                                frame_window(z.log_mel, rng.index(z.n_frames()), config.window)});
        }
      }
    }
  }
  if (out.empty()) throw InvalidArgument("triplet sampler: no pronunciation has two recordings");
  return out;
}

Eigen::MatrixXd embed_spectrogram(const DtwSiameseModel& model, const MelSpectrogram& mel) {
  const EncoderConfig& c = model.encoder.config();
  if (mel.n_mels() != c.n_mels) {
    throw InvalidArgument("learned_dtw: expected " + std::to_string(c.n_mels) + " Mel bands, got " +
                          std::to_string(mel.n_mels()));
  }
  const Eigen::MatrixXd e = model.encoder.encode(spectrogram_windows(mel.log_mel, c.window));
  return factorize(model.metric) * e.transpose();
}

double learned_dtw_score(const Eigen::MatrixXd& embedded_a, const Eigen::MatrixXd& embedded_b) {
  return dtw(embedded_a, embedded_b, squared_euclidean_distance).normalized_cost();
}

DtwResult learned_dtw(const MelSpectrogram& a, const MelSpectrogram& b,
                      const DtwSiameseModel& model) {
  if (a.n_mels() != b.n_mels()) throw InvalidArgument("learned_dtw: n_mels mismatch");
  return dtw(embed_spectrogram(model, a), embed_spectrogram(model, b), squared_euclidean_distance);
}

DetectionVerdict dtw_siamese_detect(const MelSpectrogram& user, const MelSpectrogram& tts,
                                    const DtwSiameseModel& model, double threshold) {
  return make_verdict(learned_dtw(user, tts, model).normalized_cost(), threshold);
}

void save_dtw_siamese(const std::filesystem::path& path, const DtwSiameseModel& model) {
  nn::Checkpoint ckpt;
  ckpt.metadata = Json{{"kind", kModelKind}, {"version", 1}, {"config", train_config_to_json(model.config)}}.dump();
  ckpt.tensors.emplace_back("metric", nn::Tensor::from_eigen(model.metric));
  nn::append_parameters(ckpt, model.encoder.parameters(), "encoder.");
  nn::save_checkpoint(path, ckpt);
}

DtwSiameseModel load_dtw_siamese(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  MetricTrainConfig config;
  try {
    const Json meta = Json::parse(ckpt.metadata);
    if (meta.at("kind").get<std::string>() != kModelKind) {
      throw IoError(path.string() + ": not a dtw-siamese checkpoint");
    }
    config = train_config_from_json(meta.at("config"));
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": bad metadata: " + e.what());
  }
  nn::ParameterSet params;
  nn::load_parameters(ckpt, params, "encoder.");
  TwinEncoder encoder(config.encoder, std::move(params));
  Eigen::MatrixXd metric = ckpt.tensor("metric").to_eigen();
  if (static_cast<std::size_t>(metric.rows()) != encoder.config().embedding_dim()) {
    throw IoError(path.string() + ": metric does not match the encoder dimension");
  }
  require_pd(metric, "load_dtw_siamese");
  return DtwSiameseModel{std::move(encoder), std::move(metric), config};
}

}  // namespace pronlearn
