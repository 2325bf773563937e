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

#ifndef PRONLEARN_GBDT_HPP_
#define PRONLEARN_GBDT_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pronlearn {

using PairFeatures = std::vector<double>;

constexpr std::size_t kDefaultPoolSegments = 4;

// Mean-pools each sequence (rows) into `segments` equal-width segments and
// concatenates user then TTS. Sequences shorter than `segments` are padded
// with zero rows first.
PairFeatures build_features(const Eigen::MatrixXd& user, const Eigen::MatrixXd& tts,
                            std::size_t segments = kDefaultPoolSegments);

struct GbdtParams {
  std::size_t trees = 100;
  std::size_t depth = 4;
  double shrinkage = 0.1;
  double lambda = 1.0;  // L2 penalty on leaf values

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  bool operator==(const RegressionTree&) const = default;
};

struct GbdtModel {
  std::size_t n_features = 0;
  double base_score = 0.0;  // prior log-odds
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;

  double margin(std::span<const double> x) const;
  bool operator==(const GbdtModel&) const = default;
};

struct GbdtTrainResult {
  // Mean training log-loss before any tree, then after each accepted tree.
  std::vector<double> log_loss;
};

// Logistic-loss boosting; each tree is grown level by level with exact
// greedy splits on gradient/hessian statistics and Newton leaf values. A tree
// that would raise the training loss has its leaves halved until it does not.
GbdtModel train_gbdt(std::span<const PairFeatures> features, std::span<const bool> labels,
                     const GbdtParams& params = {}, GbdtTrainResult* result = nullptr);

// P(label = 1).
double predict(const GbdtModel& model, std::span<const double> features);

std::string serialize_gbdt(const GbdtModel& model);
GbdtModel parse_gbdt(std::string_view text);
void save_gbdt(const std::filesystem::path& path, const GbdtModel& model);
GbdtModel load_gbdt(const std::filesystem::path& path);

}  // namespace pronlearn

#endif  // PRONLEARN_GBDT_HPP_
