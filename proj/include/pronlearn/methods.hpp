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


#ifndef PRONLEARN_METHODS_HPP_
#define PRONLEARN_METHODS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pronlearn/calibration.hpp"
#include "pronlearn/correction.hpp"
#include "pronlearn/datagen.hpp"
#include "pronlearn/dtw_siamese.hpp"

namespace pronlearn {

// `kEmbeddings` only trains; `kOracle` scores with the ground-truth label.
enum class Method { kP2p, kGbdt, kDtw, kFastDtw, kMelSiamese, kDtwSiamese, kEmbeddings, kOracle };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);  // throws InvalidArgument
bool is_trainable(Method method);
bool is_detector(Method method);
bool uses_audio(Method method);

// The phoneme corpus used to compare the learned pair classifier with P2P:
// mostly homograph mispronunciations, which a symbol mapping cannot see.
DatasetSpec homograph_heavy_spec();

struct TrainOptions {
  std::uint64_t seed = 7;
  std::size_t epochs = 0;  // 0 keeps the method default
  MetricObserver observer;  // dtw-siamese metric updates
};

std::size_t default_epochs(Method method);

struct TrainStage {
  std::string name;
  std::vector<double> loss;  // per epoch, or per boosting round
};

struct TrainSummary {
  Method method = Method::kGbdt;
  std::vector<TrainStage> stages;
  std::size_t metric_updates = 0;
};

// Trains on the corpus's train split and writes model.json, the artifacts it
// lists and train_log.json into `model_dir`. Throws NumericError when a loss
// goes non-finite.
TrainSummary train_method(Method method, const Corpus& corpus,
                          const std::filesystem::path& model_dir, const TrainOptions& options = {});

nlohmann::ordered_json to_json(const TrainSummary& summary);

class Detector {
 public:
  virtual ~Detector() = default;
  Method method() const { return method_; }
  // Dissimilarity scores, one per audio variant for audio methods and a
  // single score otherwise. Higher means more likely mispronounced.
  virtual std::vector<double> score(const Corpus& corpus, const Example& example) const = 0;

 protected:
  explicit Detector(Method method) : method_(method) {}

 private:
  Method method_;
};

// `model_dir` is ignored for methods that need no training.
std::unique_ptr<Detector> make_detector(Method method, const std::filesystem::path& model_dir = {});

struct ScoredItem {
  const Example* example = nullptr;
  std::size_t variant = 0;
  double score = 0.0;
};

std::vector<ScoredItem> score_split(const Detector& detector, const Corpus& corpus, Split split);
std::vector<ScoredPair> scored_pairs(std::span<const ScoredItem> items);

// The pronunciation the user ends up hearing: the one they said when the item
// is flagged, the synthesizer's otherwise.
PhonemeSequence final_pronunciation(const Corpus& corpus, const Example& example, bool flagged);

MethodReport evaluate_method(const Corpus& corpus, std::span<const ScoredItem> items,
                             double threshold);

struct ThresholdRecord {
  Method method = Method::kP2p;
  std::filesystem::path model_dir;
  std::string split = "calibration";
  double target_precision = 0.95;
  PrPoint point;
};

nlohmann::ordered_json to_json(const ThresholdRecord& record);
ThresholdRecord threshold_record_from_json(const nlohmann::ordered_json& j);
void save_threshold_record(const std::filesystem::path& path, const ThresholdRecord& record);
ThresholdRecord load_threshold_record(const std::filesystem::path& path);

struct SimulationOutcome {
  std::string example_id;
  std::string user_id;
  double score = 0.0;
  bool flagged = false;
  bool corrected = false;
  bool label = false;
};

struct SimulationReport {
  Method method = Method::kP2p;
  double threshold = 0.0;
  std::filesystem::path store_path;
  std::size_t interactions = 0;
  std::size_t flagged = 0;
  std::size_t corrections = 0;
  std::size_t true_corrections = 0;  // applied to a mispronounced entity
  std::size_t users = 0;
  std::vector<SimulationOutcome> outcomes;

  double correction_precision() const;
};

// Runs the detect-then-correct pipeline once per example of `split`, in
// corpus order. Audio methods use the first recording of each example.
SimulationReport simulate_corrections(const Detector& detector, const Corpus& corpus, Split split,
                                      double threshold, const CorrectionPolicy& policy,
                                      PronunciationStore& store);

nlohmann::ordered_json to_json(const SimulationReport& report);
std::string format_summary(const SimulationReport& report);

}  // namespace pronlearn

#endif  // PRONLEARN_METHODS_HPP_
