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

#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "pronlearn/dtw.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/rng.hpp"

using namespace pronlearn;

namespace {

FrameSequence row(std::initializer_list<double> values) {
  FrameSequence s(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double v : values) s(0, k++) = v;
  return s;
}

FrameSequence random_frames(Rng& rng, std::size_t dim, std::size_t len) {
  FrameSequence s(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(len));
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    for (Eigen::Index r = 0; r < s.rows(); ++r) s(r, c) = rng.uniform(-2.0, 2.0);
  return s;
}

// Minimum over every monotone path, by enumeration.
double brute_force(const FrameSequence& a, const FrameSequence& b, const FrameDistance& dist,
                   std::size_t i, std::size_t j) {
  const double here = dist(a.col(static_cast<Eigen::Index>(i)), b.col(static_cast<Eigen::Index>(j)));
  const auto n = static_cast<std::size_t>(a.cols());
  const auto m = static_cast<std::size_t>(b.cols());
  if (i == n - 1 && j == m - 1) return here;
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < n) best = std::min(best, brute_force(a, b, dist, i + 1, j));
  if (j + 1 < m) best = std::min(best, brute_force(a, b, dist, i, j + 1));
  if (i + 1 < n && j + 1 < m) best = std::min(best, brute_force(a, b, dist, i + 1, j + 1));
  return here + best;
}

double path_cost(const FrameSequence& a, const FrameSequence& b, const FrameDistance& dist,
                 const WarpPath& path) {
  double total = 0.0;
  for (const auto& [i, j] : path) {
    total += dist(a.col(static_cast<Eigen::Index>(i)), b.col(static_cast<Eigen::Index>(j)));
  }
  return total;
}

MelSpectrogram tone_sequence(const std::vector<std::pair<double, double>>& segments) {
  Waveform w;
  for (const auto& [hz, seconds] : segments) {
    const auto n = static_cast<std::size_t>(seconds * w.sample_rate);
    for (std::size_t i = 0; i < n; ++i) {
      w.samples.push_back(0.4 * std::sin(2.0 * M_PI * hz * static_cast<double>(i) / w.sample_rate));
    }
  }
  return mel_spectrogram(w);
}

MelSpectrogram duplicate_frames(const MelSpectrogram& mel) {
  MelSpectrogram out = mel;
  out.log_mel.resize(mel.log_mel.rows(), 2 * mel.log_mel.cols());
  for (Eigen::Index t = 0; t < mel.log_mel.cols(); ++t) {
    out.log_mel.col(2 * t) = mel.log_mel.col(t);
    out.log_mel.col(2 * t + 1) = mel.log_mel.col(t);
  }
  return out;
}

}  // namespace

TEST_CASE("dtw of a sequence with itself is the diagonal") {
  Rng rng(11);
  const FrameSequence a = random_frames(rng, 3, 9);
  const DtwResult r = dtw(a, a, euclidean_distance);
  CHECK(r.cost == 0.0);
  REQUIRE(r.path.size() == 9);
  for (std::size_t k = 0; k < 9; ++k) CHECK(r.path[k] == std::pair<std::size_t, std::size_t>{k, k});
}

TEST_CASE("dtw single frame against three") {
  const DtwResult r = dtw(row({0}), row({0, 1, 2}), manhattan_distance);
  CHECK(r.cost == 3.0);
  CHECK(r.path == WarpPath{{0, 0}, {0, 1}, {0, 2}});
}

TEST_CASE("dtw matches exhaustive enumeration") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = trial == 0 ? 4 : 1 + rng.index(6);
    const std::size_t m = trial == 0 ? 4 : 1 + rng.index(6);
    const FrameSequence a = random_frames(rng, 2, n);
    const FrameSequence b = random_frames(rng, 2, m);
    for (const FrameDistance& dist :
         {FrameDistance(euclidean_distance), FrameDistance(squared_euclidean_distance)}) {
      const DtwResult r = dtw(a, b, dist);
      CHECK(r.cost == doctest::Approx(brute_force(a, b, dist, 0, 0)).epsilon(1e-12));
      CHECK(is_valid_path(r.path, n, m));
      CHECK(r.cost == doctest::Approx(path_cost(a, b, dist, r.path)).epsilon(1e-12));
    }
  }
}

TEST_CASE("dtw is symmetric and zero on identical inputs") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const FrameSequence a = random_frames(rng, 4, 1 + rng.index(30));
    const FrameSequence b = random_frames(rng, 4, 1 + rng.index(30));
    CHECK(std::abs(dtw(a, b, euclidean_distance).cost - dtw(b, a, euclidean_distance).cost) < 1e-9);
    CHECK(dtw(a, a, euclidean_distance).cost == 0.0);
    CHECK(fast_dtw(a, a, rng.index(4), euclidean_distance).cost == 0.0);
  }
}

TEST_CASE("fast_dtw is exact at large radius and never beats exact") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.index(60);
    const std::size_t m = 1 + rng.index(60);
    const FrameSequence a = random_frames(rng, 3, n);
    const FrameSequence b = random_frames(rng, 3, m);
    const DtwResult exact = dtw(a, b, euclidean_distance);
    const DtwResult wide = fast_dtw(a, b, std::max(n, m), euclidean_distance);
    CHECK(wide.cost == doctest::Approx(exact.cost).epsilon(1e-12));
    for (std::size_t radius : {0u, 1u, 2u, 5u}) {
      const DtwResult fast = fast_dtw(a, b, radius, euclidean_distance);
      CHECK(fast.cost >= exact.cost - 1e-9);
      CHECK(is_valid_path(fast.path, n, m));
      CHECK(fast.cost == doctest::Approx(path_cost(a, b, euclidean_distance, fast.path)).epsilon(1e-12));
    }
  }
}

TEST_CASE("coarsen averages pairs") {
  const FrameSequence c = coarsen(row({1, 3, 5, 7, 9}));
  CHECK(c.cols() == 3);
  CHECK(c(0, 0) == 2.0);
  CHECK(c(0, 1) == 6.0);
  CHECK(c(0, 2) == 9.0);
}

TEST_CASE("dtw errors") {
  CHECK_THROWS_AS(dtw(FrameSequence(1, 0), row({1}), euclidean_distance), InvalidArgument);
  CHECK_THROWS_AS(fast_dtw(row({1}), FrameSequence(1, 0), 2, euclidean_distance), InvalidArgument);
  CHECK_THROWS_AS(dtw(FrameSequence::Zero(2, 3), row({1, 2, 3}), euclidean_distance), InvalidArgument);
  CHECK_THROWS_AS(dtw_windowed(row({1, 2}), row({1, 2}), euclidean_distance, {{0, 0}, {0, 0}}),
                  InvalidArgument);
  CHECK(is_valid_path({{0, 0}, {1, 1}}, 2, 2));
  CHECK_FALSE(is_valid_path({{0, 0}, {2, 2}}, 3, 3));
  CHECK_FALSE(is_valid_path({{0, 0}, {1, 0}}, 2, 2));
  CHECK_FALSE(is_valid_path({{0, 1}, {1, 1}}, 2, 2));
}

TEST_CASE("dtw_detect") {
  const MelSpectrogram a = tone_sequence({{300, 0.2}, {900, 0.15}, {1500, 0.25}});
  const MelSpectrogram b = tone_sequence({{300, 0.25}, {700, 0.12}, {1500, 0.2}});

  const DetectionVerdict same = dtw_detect(a, a, 0.1);
  CHECK(same.score == 0.0);
  CHECK_FALSE(same.mispronounced);

  const double score = dtw_score(a, b);
  CHECK(score > 0.0);
  CHECK(dtw_detect(a, b, score * 0.99).mispronounced);
  CHECK_FALSE(dtw_detect(a, b, score).mispronounced);

  const double doubled = dtw_score(duplicate_frames(a), duplicate_frames(b));
  CHECK(std::abs(doubled - score) / score < 0.10);

  MelSpectrogram other = a;
  other.log_mel = Eigen::MatrixXd::Zero(20, a.log_mel.cols());
  CHECK_THROWS_AS(dtw_detect(a, other, 1.0), InvalidArgument);
}
