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

#include "doctest.h"
#include "pronlearn/errors.hpp"
#include "pronlearn/gbdt.hpp"
#include "pronlearn/rng.hpp"

using namespace pronlearn;

namespace {

struct Dataset {
  std::vector<PairFeatures> x;
  std::vector<char> y;
  std::span<const bool> labels() const {
    return {reinterpret_cast<const bool*>(y.data()), y.size()};
  }
};

// Linearly separable: label = w.x > 0 with a margin.
Dataset separable(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(dim);
  for (auto& v : w) v = rng.normal();
  Dataset d;
  while (d.x.size() < n) {
    PairFeatures x(dim);
    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] = rng.uniform(-1.0, 1.0);
      dot += w[j] * x[j];
    }
    if (std::abs(dot) < 0.2) continue;
    d.x.push_back(std::move(x));
    d.y.push_back(dot > 0);
  }
  return d;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("build_features pooling") {
  Eigen::MatrixXd u(3, 2);
  u << 1, 2, 3, 4, 5, 9;
  Eigen::MatrixXd t(1, 2);
  t << 7, 8;
  CHECK(build_features(u, t, 1) == PairFeatures{3, 5, 7, 8});
  const PairFeatures same = build_features(u, u, 2);
  CHECK(std::equal(same.begin(), same.begin() + 4, same.begin() + 4));

  Eigen::MatrixXd two(2, 2);
  two << 1, 1, 2, 2;
  const PairFeatures padded = build_features(two, two, 4);
  CHECK(padded.size() == 16);
  CHECK(PairFeatures(padded.begin(), padded.begin() + 8) == PairFeatures{1, 1, 2, 2, 0, 0, 0, 0});

  // Six rows in four segments: widths 1, 2, 1, 2.
  Eigen::MatrixXd six(6, 1);
  six << 0, 1, 2, 3, 4, 5;
  const PairFeatures f6 = build_features(six, six, 4);
  CHECK(PairFeatures(f6.begin(), f6.begin() + 4) == PairFeatures{0, 1.5, 3, 4.5});

  CHECK(build_features(Eigen::MatrixXd(0, 2), two, 2) == PairFeatures{0, 0, 0, 0, 1, 1, 2, 2});
  CHECK_THROWS_AS(build_features(u, Eigen::MatrixXd(2, 3)), InvalidArgument);
}

TEST_CASE("no trees predicts the prior") {
  const Dataset d = separable(40, 3, 1);
  GbdtParams params;
  params.trees = 0;
  const GbdtModel model = train_gbdt(d.x, d.labels(), params);
  double positives = 0;
  for (char y : d.y) positives += y;
  for (const auto& x : d.x) CHECK(predict(model, x) == doctest::Approx(positives / 40).epsilon(1e-12));

  params.trees = 20;
  params.shrinkage = 0.0;
  const GbdtModel flat = train_gbdt(d.x, d.labels(), params);
  for (const auto& x : d.x) CHECK(predict(flat, x) == doctest::Approx(positives / 40).epsilon(1e-12));
}

TEST_CASE("separable toy set") {
  const Dataset d = separable(40, 4, 2);
  GbdtParams params;
  params.trees = 50;
  params.depth = 3;
  GbdtTrainResult result;
  const GbdtModel model = train_gbdt(d.x, d.labels(), params, &result);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    const double p = predict(model, d.x[i]);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    correct += (p > 0.5) == static_cast<bool>(d.y[i]);
  }
  CHECK(correct == 40);
  REQUIRE(result.log_loss.size() == model.trees.size() + 1);
  for (std::size_t t = 1; t < result.log_loss.size(); ++t) {
    CHECK(result.log_loss[t] <= result.log_loss[t - 1]);
  }
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.leaf()) CHECK(static_cast<std::size_t>(node.feature) < 4);
    }
  }
  // Order of queries does not matter.
  const double first = predict(model, d.x[0]);
  for (std::size_t i = d.x.size(); i-- > 0;) predict(model, d.x[i]);
  CHECK(predict(model, d.x[0]) == first);
}

TEST_CASE("loss never increases on noisy data") {
  Dataset d = separable(300, 6, 3);
  Rng rng(4);
  for (auto& y : d.y) {
    if (rng.bernoulli(0.25)) y = !y;
  }
  GbdtParams params;
  params.shrinkage = 1.0;
  params.lambda = 0.0;
  GbdtTrainResult result;
  train_gbdt(d.x, d.labels(), params, &result);
  for (std::size_t t = 1; t < result.log_loss.size(); ++t) {
    CHECK(result.log_loss[t] <= result.log_loss[t - 1]);
  }
}

TEST_CASE("stump matches exhaustive split search") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d;
    const std::size_t n = 30, dim = 3;
    for (std::size_t i = 0; i < n; ++i) {
      PairFeatures x(dim);
      // Coarse values force ties between thresholds and features.
      for (auto& v : x) v = static_cast<double>(rng.index(5));
      d.x.push_back(x);
      d.y.push_back(rng.bernoulli(0.4));
    }
    if (std::count(d.y.begin(), d.y.end(), 1) == 0) d.y[0] = 1;
    if (std::count(d.y.begin(), d.y.end(), 0) == 0) d.y[0] = 0;
    GbdtParams params;
    params.trees = 1;
    params.depth = 1;
    params.shrinkage = 1.0;
    const GbdtModel model = train_gbdt(d.x, d.labels(), params);

    double pos = 0;
    for (char y : d.y) pos += y;
    const double base = std::log(pos / (n - pos));
    const double p = sigmoid(base);
    const double lambda = 1.0;
    double g = 0, h = 0;
    for (char y : d.y) {
      g += p - y;
      h += p * (1 - p);
    }
    double best = 1e-12;
    int best_f = -1;
    double best_t = 0;
    for (std::size_t f = 0; f < dim; ++f) {
      for (int t = 0; t < 4; ++t) {
        double gl = 0, hl = 0;
        std::size_t left = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (d.x[i][f] <= t + 0.5) {
            gl += p - d.y[i];
            hl += p * (1 - p);
            ++left;
          }
        }
        if (left == 0 || left == n) continue;
        const double gain = gl * gl / (hl + lambda) + (g - gl) * (g - gl) / (h - hl + lambda) -
                            g * g / (h + lambda);
        if (gain > best) {
          best = gain;
          best_f = static_cast<int>(f);
          best_t = t + 0.5;
        }
      }
    }
    REQUIRE(model.trees.size() <= 1);
    if (model.trees.empty()) continue;
    const RegressionTree& tree = model.trees[0];
    if (best_f < 0) {
      CHECK(tree.nodes.size() == 1);
      continue;
    }
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == best_f);
    // Any threshold in [t - 0.5, t + 0.5) yields the same partition.
    CHECK(tree.nodes[0].threshold >= best_t - 0.5);
    CHECK(tree.nodes[0].threshold < best_t + 0.5);
  }
}

TEST_CASE("ties prefer the lowest feature") {
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    d.x.push_back({static_cast<double>(i), static_cast<double>(i)});
    d.y.push_back(i >= 5);
  }
  GbdtParams params;
  params.trees = 1;
  params.depth = 1;
  const GbdtModel model = train_gbdt(d.x, d.labels(), params);
  REQUIRE(model.trees.size() == 1);
  CHECK(model.trees[0].nodes[0].feature == 0);
  CHECK(model.trees[0].nodes[0].threshold == 4.5);
}

TEST_CASE("text format round trip") {
  const Dataset d = separable(60, 5, 6);
  const GbdtModel model = train_gbdt(d.x, d.labels());
  const std::string text = serialize_gbdt(model);
  CHECK(text.rfind("pronlearn-gbdt 1\n", 0) == 0);
  const GbdtModel back = parse_gbdt(text);
  CHECK(back == model);
  for (const auto& x : d.x) CHECK(predict(back, x) == predict(model, x));
  const auto path = std::filesystem::temp_directory_path() / "pronlearn_gbdt.txt";
  save_gbdt(path, model);
  CHECK(load_gbdt(path) == model);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(parse_gbdt("pronlearn-gbdt 2\n"), IoError);
  CHECK_THROWS_AS(parse_gbdt(text.substr(0, text.size() / 2)), IoError);
  CHECK_THROWS_AS(parse_gbdt("pronlearn-gbdt 1\nfeatures 2\nbase_score 0\nshrinkage 0.1\ntrees 1\n"
                             "tree 0 3\nsplit 0 5 0.5 1 2\nleaf 1 0.1\nleaf 2 0.2\n"),
                  IoError);
}

TEST_CASE("training errors") {
  Dataset d = separable(10, 2, 7);
  std::fill(d.y.begin(), d.y.end(), 1);
  CHECK_THROWS_AS(train_gbdt(d.x, d.labels()), InvalidArgument);
  CHECK_THROWS_AS(train_gbdt({}, {}), InvalidArgument);
  const Dataset ok = separable(10, 2, 8);
  const GbdtModel model = train_gbdt(ok.x, ok.labels());
  CHECK_THROWS_AS(predict(model, PairFeatures{1.0}), InvalidArgument);
}
