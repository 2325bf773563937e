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


#include "pronlearn/methods.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <set>
#include <utility>

#include "io_util.hpp"
#include "json_util.hpp"
#include "pronlearn/dtw.hpp"
#include "pronlearn/embeddings.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/gbdt.hpp"
#include "pronlearn/mel_siamese.hpp"
#include "pronlearn/rng.hpp"

namespace pronlearn {

namespace fs = std::filesystem;
using detail::Json;

namespace {

constexpr const char* kManifestName = "model.json";
constexpr const char* kTrainLogName = "train_log.json";
constexpr const char* kManifestFormat = "pronlearn-model";
constexpr const char* kDtwSiameseFile = "dtw_siamese.ckpt";
constexpr const char* kMelSiameseFile = "mel_siamese.ckpt";

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr MethodName kMethodNames[] = {
    {Method::kP2p, "p2p"},
    {Method::kGbdt, "gbdt"},
    {Method::kDtw, "dtw"},
    {Method::kFastDtw, "fastdtw"},
    {Method::kMelSiamese, "mel-siamese"},
    {Method::kDtwSiamese, "dtw-siamese"},
    {Method::kEmbeddings, "embeddings"},
    {Method::kOracle, "oracle"},
};

std::string seq2seq_file(const std::string& locale) { return locale + ".seq2seq"; }
std::string gbdt_file(const std::string& locale) { return locale + ".gbdt"; }

void check_finite(const TrainStage& stage) {
  for (std::size_t k = 0; k < stage.loss.size(); ++k) {
    if (!std::isfinite(stage.loss[k])) {
      throw NumericError(stage.name + ": training diverged (non-finite loss at epoch " +
                         std::to_string(k + 1) + ")");
    }
  }
}

void require_audio(Method method, const Corpus& corpus) {
  if (uses_audio(method) && corpus.spec.mode != CorpusMode::kAudio) {
    throw InvalidArgument("method " + std::string(to_string(method)) + " needs an audio corpus");
  }
}

Seq2SeqModel train_locale_seq2seq(const Corpus& corpus, const LocaleInventory& inv,
                                  const TrainOptions& options, std::size_t epochs,
                                  TrainStage& stage) {
  std::vector<SequencePair> pairs;
  for (const auto& e : corpus.examples) {
    if (e.locale == inv.locale && e.split == Split::kTrain && !e.label) pairs.push_back({e.asr, e.tts});
  }
  if (pairs.empty()) {
    throw InvalidArgument("no correctly pronounced training examples for locale " + inv.locale);
  }
  Seq2SeqConfig config;
  config.epochs = epochs;
  config.seed = derive_seed(options.seed, hash_name(inv.locale));
  Seq2SeqTrainResult result;
  Seq2SeqModel model = train_seq2seq(pairs, inv.asr, inv.tts, config, &result);
  stage.name = inv.locale + "/seq2seq";
  stage.loss = std::move(result.epoch_loss);
  check_finite(stage);
  return model;
}

PairFeatures pair_features(const EmbeddingTable& source, const EmbeddingTable& target,
                           const Example& e) {
  return build_features(embed_sequence(source, e.asr), embed_sequence(target, e.tts));
}

// Owns spectrograms so recordings and pairs can point into it.
class MelCache {
 public:
  explicit MelCache(const Corpus& corpus) : corpus_(corpus) {}

  const MelSpectrogram& user(const Example& e, std::size_t v) {
    mels_.push_back(mel_spectrogram(user_audio(corpus_, e, v)));
    return mels_.back();
  }
  const MelSpectrogram& tts(const Example& e) {
    mels_.push_back(mel_spectrogram(tts_audio(corpus_, e)));
    return mels_.back();
  }

 private:
  const Corpus& corpus_;
  std::deque<MelSpectrogram> mels_;
};

std::vector<std::string> train_phoneme(Method method, const Corpus& corpus, const fs::path& dir,
                                       const TrainOptions& options, std::size_t epochs,
                                       TrainSummary& summary) {
  std::vector<std::string> artifacts;
  for (const auto& inv : corpus.inventories) {
    TrainStage stage;
    const Seq2SeqModel s2s = train_locale_seq2seq(corpus, inv, options, epochs, stage);
    summary.stages.push_back(std::move(stage));
    save_seq2seq(dir / seq2seq_file(inv.locale), s2s);
    artifacts.push_back(seq2seq_file(inv.locale));
    if (method != Method::kGbdt) continue;

    const auto [source, target] = extract_embeddings(s2s);
    std::vector<PairFeatures> features;
    std::vector<char> labels;
    for (const auto& e : corpus.examples) {
      if (e.locale != inv.locale || e.split != Split::kTrain) continue;
      features.push_back(pair_features(source, target, e));
      labels.push_back(e.label);
    }
    const std::unique_ptr<bool[]> flags(new bool[labels.size()]);
    for (std::size_t i = 0; i < labels.size(); ++i) flags[i] = labels[i] != 0;
    GbdtTrainResult result;
    const GbdtModel gbdt =
        train_gbdt(features, std::span<const bool>(flags.get(), labels.size()), {}, &result);
    TrainStage boost{inv.locale + "/gbdt", std::move(result.log_loss)};
    check_finite(boost);
    summary.stages.push_back(std::move(boost));
    save_gbdt(dir / gbdt_file(inv.locale), gbdt);
    artifacts.push_back(gbdt_file(inv.locale));
  }
  return artifacts;
}

std::vector<std::string> train_dtw_siamese_method(const Corpus& corpus, const fs::path& dir,
                                                  const TrainOptions& options, std::size_t epochs,
                                                  TrainSummary& summary) {
  MelCache cache(corpus);
  std::vector<Recording> recordings;
  for (const auto& e : corpus.examples) {
    if (e.split != Split::kTrain) continue;
    const LocaleInventory& inv = corpus.inventory(e.locale);
    const std::string said = e.locale + " " + format_sequence(inv.tts, inv.asr_to_tts_space(e.asr));
    const std::string synthesized = e.locale + " " + format_sequence(inv.tts, e.tts);
    recordings.push_back({&cache.tts(e), synthesized, e.locale});
    for (std::size_t v = 0; v < corpus.variants(); ++v) {
      recordings.push_back({&cache.user(e, v), said, e.locale});
    }
  }
  MetricTrainConfig config;
  config.epochs = epochs;
  config.seed = options.seed;
  TripletSamplerConfig sampler;
  sampler.window = config.encoder.window;
  sampler.seed = options.seed;
  const std::vector<Triplet> triplets = sample_triplets(recordings, sampler);
  if (triplets.empty()) throw InvalidArgument("dtw-siamese: the train split yields no triplets");

  std::size_t updates = 0;
  const MetricTrainResult result = train_dtw_siamese(triplets, config, [&](const MetricUpdateEvent& ev) {
    ++updates;
    if (options.observer) options.observer(ev);
  });
  TrainStage stage{"metric", {}};
  for (const auto& ep : result.epochs) stage.loss.push_back(ep.mean_loss);
  check_finite(stage);
  summary.stages.push_back(std::move(stage));
  summary.metric_updates = updates;
  save_dtw_siamese(dir / kDtwSiameseFile, result.model);
  return {kDtwSiameseFile};
}

std::vector<std::string> train_mel_siamese_method(const Corpus& corpus, const fs::path& dir,
                                                  const TrainOptions& options, std::size_t epochs,
                                                  TrainSummary& summary) {
  MelCache cache(corpus);
  std::vector<MelPair> pairs;
  for (const auto& e : corpus.examples) {
    if (e.split != Split::kTrain) continue;
    const MelSpectrogram& tts = cache.tts(e);
    for (std::size_t v = 0; v < corpus.variants(); ++v) pairs.push_back({&cache.user(e, v), &tts, !e.label});
  }
  ConvSiameseConfig config;
  config.epochs = epochs;
  config.seed = options.seed;
  ConvTrainResult result;
  const ConvTwinNet model = train_conv_siamese(pairs, config, &result);
  TrainStage stage{"siamese", std::move(result.epoch_loss)};
  check_finite(stage);
  summary.stages.push_back(std::move(stage));
  save_conv_siamese(dir / kMelSiameseFile, model);
  return {kMelSiameseFile};
}

Json read_manifest(Method method, const fs::path& dir) {
  Json manifest;
  try {
    manifest = Json::parse(detail::read_file(dir / kManifestName));
  } catch (const Json::exception& ex) {
    throw IoError((dir / kManifestName).string() + ": " + ex.what());
  }
  if (manifest.value("format", "") != kManifestFormat) {
    throw IoError((dir / kManifestName).string() + ": not a model manifest");
  }
  const std::string stored = manifest.value("method", "");
  if (stored != to_string(method)) {
    throw InvalidArgument(dir.string() + " holds a " + stored + " model, not " +
                          std::string(to_string(method)));
  }
  return manifest;
}

class OracleDetector final : public Detector {
 public:
  OracleDetector() : Detector(Method::kOracle) {}
  std::vector<double> score(const Corpus&, const Example& e) const override {
    return {e.label ? 1.0 : 0.0};
  }
};

class P2pDetector final : public Detector {
 public:
  P2pDetector() : Detector(Method::kP2p) {}
  std::vector<double> score(const Corpus& corpus, const Example& e) const override {
    const LocaleInventory& inv = corpus.inventory(e.locale);
    return {normalized_distance(e.asr, inv.p2p_mapping.to_asr(e.tts))};
  }
};

class AudioDetector : public Detector {
 public:
  using Detector::Detector;
  std::vector<double> score(const Corpus& corpus, const Example& e) const override {
    require_audio(method(), corpus);
    const MelSpectrogram tts = mel_spectrogram(tts_audio(corpus, e));
    prepare(tts);
    std::vector<double> out;
    for (std::size_t v = 0; v < corpus.variants(); ++v) {
      out.push_back(score_pair(mel_spectrogram(user_audio(corpus, e, v)), tts));
    }
    return out;
  }

 protected:
  virtual void prepare(const MelSpectrogram&) const {}
  virtual double score_pair(const MelSpectrogram& user, const MelSpectrogram& tts) const = 0;
};

class DtwDetector final : public AudioDetector {
 public:
  explicit DtwDetector(bool exact) : AudioDetector(exact ? Method::kDtw : Method::kFastDtw), exact_(exact) {}

 private:
  double score_pair(const MelSpectrogram& user, const MelSpectrogram& tts) const override {
    if (exact_) return dtw(user.log_mel, tts.log_mel, euclidean_distance).normalized_cost();
    return dtw_score(user, tts);
  }
  bool exact_;
};

class MelSiameseDetector final : public AudioDetector {
 public:
  explicit MelSiameseDetector(ConvTwinNet model)
      : AudioDetector(Method::kMelSiamese), model_(std::move(model)) {}

 private:
  double score_pair(const MelSpectrogram& user, const MelSpectrogram& tts) const override {
    return 1.0 - pronlearn::score_pair(model_, user, tts);
  }
  ConvTwinNet model_;
};

class DtwSiameseDetector final : public AudioDetector {
 public:
  explicit DtwSiameseDetector(DtwSiameseModel model)
      : AudioDetector(Method::kDtwSiamese), model_(std::move(model)) {}

 private:
  void prepare(const MelSpectrogram& tts) const override { tts_ = embed_spectrogram(model_, tts); }
  double score_pair(const MelSpectrogram& user, const MelSpectrogram&) const override {
    return learned_dtw_score(embed_spectrogram(model_, user), tts_);
  }
  DtwSiameseModel model_;
  mutable Eigen::MatrixXd tts_;  // embedding of the TTS side of the current example
};

class GbdtDetector final : public Detector {
 public:
  explicit GbdtDetector(const fs::path& dir) : Detector(Method::kGbdt) {
    const Json manifest = read_manifest(Method::kGbdt, dir);
    for (const auto& l : manifest.at("locales")) {
      const std::string locale = l.get<std::string>();
      auto tables = extract_embeddings(load_seq2seq(dir / seq2seq_file(locale)));
      models_.emplace(locale, LocaleModel{std::move(tables.first), std::move(tables.second),
                                          load_gbdt(dir / gbdt_file(locale))});
    }
  }

  std::vector<double> score(const Corpus&, const Example& e) const override {
    const auto it = models_.find(e.locale);
    if (it == models_.end()) throw InvalidArgument("gbdt model has no locale " + e.locale);
    const LocaleModel& m = it->second;
    return {predict(m.gbdt, pair_features(m.source, m.target, e))};
  }

 private:
  struct LocaleModel {
    EmbeddingTable source;
    EmbeddingTable target;
    GbdtModel gbdt;
  };
  std::map<std::string, LocaleModel> models_;
};

}  // namespace

std::string_view to_string(Method method) {
  for (const auto& n : kMethodNames) {
    if (n.method == method) return n.name;
  }
  throw InvalidArgument("unknown method");
}

Method parse_method(std::string_view text) {
  for (const auto& n : kMethodNames) {
    if (n.name == text) return n.method;
  }
  throw InvalidArgument("unknown method '" + std::string(text) + "'");
}

bool is_trainable(Method method) {
  return method == Method::kGbdt || method == Method::kMelSiamese ||
         method == Method::kDtwSiamese || method == Method::kEmbeddings;
}

bool is_detector(Method method) { return method != Method::kEmbeddings; }

bool uses_audio(Method method) {
  return method == Method::kDtw || method == Method::kFastDtw || method == Method::kMelSiamese ||
         method == Method::kDtwSiamese;
}

DatasetSpec homograph_heavy_spec() {
  DatasetSpec spec = DatasetSpec::phoneme_defaults();
  const auto locales = default_locales();
  spec.locales.assign(locales.begin(), locales.begin() + 3);
  spec.entities_per_locale = 3000;
  spec.mispronunciation_rate = 0.25;
  spec.homograph_rate = 0.8;
  return spec;
}

std::size_t default_epochs(Method method) {
  switch (method) {
    case Method::kGbdt:
    case Method::kEmbeddings:
      return 10;
    case Method::kMelSiamese:
    case Method::kDtwSiamese:
      return 5;
    default:
      return 0;
  }
}

TrainSummary train_method(Method method, const Corpus& corpus, const fs::path& model_dir,
                          const TrainOptions& options) {
  if (!is_trainable(method)) {
    throw InvalidArgument("method " + std::string(to_string(method)) + " has nothing to train");
  }
  require_audio(method, corpus);
  const std::size_t epochs = options.epochs ? options.epochs : default_epochs(method);

  std::error_code ec;
  fs::create_directories(model_dir, ec);
  if (ec) throw IoError(model_dir.string() + ": " + ec.message());

  TrainSummary summary;
  summary.method = method;
  std::vector<std::string> artifacts;
  switch (method) {
    case Method::kGbdt:
    case Method::kEmbeddings:
      artifacts = train_phoneme(method, corpus, model_dir, options, epochs, summary);
      break;
    case Method::kDtwSiamese:
      artifacts = train_dtw_siamese_method(corpus, model_dir, options, epochs, summary);
      break;
    case Method::kMelSiamese:
      artifacts = train_mel_siamese_method(corpus, model_dir, options, epochs, summary);
      break;
    default:
      break;
  }

  Json locales = Json::array();
  for (const auto& inv : corpus.inventories) locales.push_back(inv.locale);
  const Json manifest{{"format", kManifestFormat},
                      {"version", 1},
                      {"method", to_string(method)},
                      {"seed", options.seed},
                      {"epochs", epochs},
                      {"locales", locales},
                      {"artifacts", artifacts}};
  detail::write_file(model_dir / kManifestName, manifest.dump(2) + "\n");
  detail::write_file(model_dir / kTrainLogName, to_json(summary).dump(2) + "\n");
  return summary;
}

nlohmann::ordered_json to_json(const TrainSummary& summary) {
  Json stages = Json::array();
  for (const auto& s : summary.stages) {
    stages.push_back(Json{{"name", s.name},
                          {"initial_loss", s.loss.empty() ? 0.0 : s.loss.front()},
                          {"final_loss", s.loss.empty() ? 0.0 : s.loss.back()},
                          {"loss", s.loss}});
  }
  Json j{{"method", to_string(summary.method)}, {"stages", stages}};
  if (summary.method == Method::kDtwSiamese) j["metric_updates"] = summary.metric_updates;
  return j;
}

std::unique_ptr<Detector> make_detector(Method method, const fs::path& model_dir) {
  switch (method) {
    case Method::kOracle:
      return std::make_unique<OracleDetector>();
    case Method::kP2p:
      return std::make_unique<P2pDetector>();
    case Method::kDtw:
      return std::make_unique<DtwDetector>(true);
    case Method::kFastDtw:
      return std::make_unique<DtwDetector>(false);
    case Method::kGbdt:
      return std::make_unique<GbdtDetector>(model_dir);
    case Method::kMelSiamese:
      read_manifest(method, model_dir);
      return std::make_unique<MelSiameseDetector>(load_conv_siamese(model_dir / kMelSiameseFile));
    case Method::kDtwSiamese:
      read_manifest(method, model_dir);
      return std::make_unique<DtwSiameseDetector>(load_dtw_siamese(model_dir / kDtwSiameseFile));
    case Method::kEmbeddings:
      break;
  }
  throw InvalidArgument("method " + std::string(to_string(method)) + " is not a detector");
}

std::vector<ScoredItem> score_split(const Detector& detector, const Corpus& corpus, Split split) {
  require_audio(detector.method(), corpus);
  std::vector<ScoredItem> items;
  for (const auto& e : corpus.examples) {
    if (e.split != split) continue;
    const std::vector<double> scores = detector.score(corpus, e);
    for (std::size_t v = 0; v < scores.size(); ++v) {
      if (!std::isfinite(scores[v])) throw NumericError("non-finite score for " + e.id);
      items.push_back({&e, v, scores[v]});
    }
  }
  if (items.empty()) {
    throw InvalidArgument("corpus has no " + std::string(to_string(split)) + " examples");
  }
  return items;
}

std::vector<ScoredPair> scored_pairs(std::span<const ScoredItem> items) {
  std::vector<ScoredPair> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back({it.score, it.example->label});
  return out;
}

PhonemeSequence final_pronunciation(const Corpus& corpus, const Example& example, bool flagged) {
  return flagged ? corpus.inventory(example.locale).asr_to_tts_space(example.asr) : example.tts;
}

MethodReport evaluate_method(const Corpus& corpus, std::span<const ScoredItem> items,
                             double threshold) {
  if (items.empty()) throw InvalidArgument("evaluate_method: no scored items");
  struct Bucket {
    std::vector<ScoredPair> pairs;
    std::vector<int> likert;
    std::vector<char> correct;
  };
  std::map<std::string, Bucket> buckets;
  for (const auto& it : items) {
    const Example& e = *it.example;
    Bucket& b = buckets[e.locale];
    b.pairs.push_back({it.score, e.label});
    const PhonemeSequence intended = corpus.inventory(e.locale).asr_to_tts_space(e.asr);
    const PhonemeSequence heard = final_pronunciation(corpus, e, it.score > threshold);
    b.likert.push_back(likert_score(heard, intended));
    b.correct.push_back(heard == intended);
  }
  MethodReport report;
  report.threshold = threshold;
  for (auto& [locale, b] : buckets) {
    const std::unique_ptr<bool[]> flags(new bool[b.correct.size()]);
    for (std::size_t i = 0; i < b.correct.size(); ++i) flags[i] = b.correct[i] != 0;
    report.locales[locale] = {evaluate_at(b.pairs, threshold),
                              likert_report(b.likert, std::span<const bool>(flags.get(), b.correct.size())),
                              b.pairs.size()};
  }
  finalize(report);
  return report;
}

nlohmann::ordered_json to_json(const ThresholdRecord& record) {
  return Json{{"method", to_string(record.method)},
              {"model", record.model_dir.string()},
              {"split", record.split},
              {"target_precision", record.target_precision},
              {"threshold", threshold_to_json(record.point.threshold)},
              {"achieved_precision", record.point.precision},
              {"achieved_recall", record.point.recall},
              {"counts", Json{{"tp", record.point.tp},
                              {"fp", record.point.fp},
                              {"fn", record.point.fn},
                              {"tn", record.point.tn}}}};
}

ThresholdRecord threshold_record_from_json(const nlohmann::ordered_json& j) {
  ThresholdRecord r;
  try {
    r.method = parse_method(j.at("method").get<std::string>());
    r.model_dir = j.at("model").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.target_precision = j.at("target_precision").get<double>();
    r.point.threshold = threshold_from_json(j.at("threshold"));
    r.point.precision = j.at("achieved_precision").get<double>();
    r.point.recall = j.at("achieved_recall").get<double>();
    const Json& c = j.at("counts");
    r.point.tp = c.at("tp").get<std::size_t>();
    r.point.fp = c.at("fp").get<std::size_t>();
    r.point.fn = c.at("fn").get<std::size_t>();
    r.point.tn = c.at("tn").get<std::size_t>();
  } catch (const Json::exception& ex) {
    throw InvalidArgument(std::string("threshold record: ") + ex.what());
  }
  return r;
}

void save_threshold_record(const fs::path& path, const ThresholdRecord& record) {
  detail::write_file(path, to_json(record).dump(2) + "\n");
}

ThresholdRecord load_threshold_record(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(detail::read_file(path));
  } catch (const Json::exception& ex) {
    throw IoError(path.string() + ": " + ex.what());
  }
  return threshold_record_from_json(j);
}

double SimulationReport::correction_precision() const {
  return corrections == 0 ? 1.0 : static_cast<double>(true_corrections) / static_cast<double>(corrections);
}

SimulationReport simulate_corrections(const Detector& detector, const Corpus& corpus, Split split,
                                      double threshold, const CorrectionPolicy& policy,
                                      PronunciationStore& store) {
  policy.validate();
  require_audio(detector.method(), corpus);
  SimulationReport report;
  report.method = detector.method();
  report.threshold = threshold;
  report.store_path = store.path();
  std::set<std::string> users;

  for (const auto& e : corpus.examples) {
    if (e.split != split) continue;
    Interaction in;
    in.user_id = e.user_id;
    in.entity_id = e.id;
    in.user_pron = e.asr;
    in.tts_pron = e.tts;
    in.signals = e.signals;
    if (uses_audio(detector.method())) {
      const Waveform w = user_audio(corpus, e, 0);
      in.user_audio = AudioReference{"audio/" + user_audio_name(e, 0), {0.0, w.duration()}};
    }
    const double score = detector.score(corpus, e).front();
    const PipelineOutcome outcome =
        run_pipeline([score](const Interaction&) { return score; }, store, in, threshold, policy);

    ++report.interactions;
    report.flagged += outcome.verdict.mispronounced;
    report.corrections += outcome.corrected;
    report.true_corrections += outcome.corrected && e.label;
    users.insert(e.user_id);
    report.outcomes.push_back({e.id, e.user_id, score, outcome.verdict.mispronounced,
                               outcome.corrected, e.label});
  }
  if (report.interactions == 0) {
    throw InvalidArgument("corpus has no " + std::string(to_string(split)) + " examples");
  }
  report.users = users.size();
  return report;
}

nlohmann::ordered_json to_json(const SimulationReport& report) {
  Json outcomes = Json::array();
  for (const auto& o : report.outcomes) {
    outcomes.push_back(Json{{"id", o.example_id},
                            {"user", o.user_id},
                            {"score", o.score},
                            {"flagged", o.flagged},
                            {"corrected", o.corrected},
                            {"label", o.label}});
  }
  return Json{{"method", to_string(report.method)},
              {"threshold", threshold_to_json(report.threshold)},
              {"store", report.store_path.string()},
              {"interactions", report.interactions},
              {"users", report.users},
              {"flagged", report.flagged},
              {"corrections", report.corrections},
              {"true_corrections", report.true_corrections},
              {"correction_precision", report.correction_precision()},
              {"outcomes", outcomes}};
}

std::string format_summary(const SimulationReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "method        %s\n"
                "interactions  %zu (%zu users)\n"
                "flagged       %zu\n"
                "corrections   %zu\n"
                "precision     %.4f\n"
                "store         %s\n",
                std::string(to_string(report.method)).c_str(), report.interactions, report.users,
                report.flagged, report.corrections, report.correction_precision(),
                report.store_path.string().c_str());
  return buf;
}

}  // namespace pronlearn
