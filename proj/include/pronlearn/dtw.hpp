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

#ifndef PRONLEARN_DTW_HPP_
#define PRONLEARN_DTW_HPP_

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pronlearn/audio.hpp"
#include "pronlearn/phoneme.hpp"

namespace pronlearn {

// Frame sequences are matrices whose columns are frames.
using FrameSequence = Eigen::MatrixXd;
using FrameRef = Eigen::Ref<const Eigen::VectorXd>;
using FrameDistance = std::function<double(const FrameRef&, const FrameRef&)>;

double euclidean_distance(const FrameRef& a, const FrameRef& b);
double squared_euclidean_distance(const FrameRef& a, const FrameRef& b);
// Sum of absolute coordinate differences.
double manhattan_distance(const FrameRef& a, const FrameRef& b);

using WarpPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct DtwResult {
  double cost = 0.0;
  WarpPath path;

  // Cost per path step.
  double normalized_cost() const { return cost / static_cast<double>(path.size()); }
};

bool is_valid_path(const WarpPath& path, std::size_t len_a, std::size_t len_b);

// Per-row inclusive column range [first, second] of admissible cells.
using SearchWindow = std::vector<std::pair<std::size_t, std::size_t>>;

// Exact DTW with steps (1,0), (0,1), (1,1). Ties prefer the diagonal.
DtwResult dtw(const FrameSequence& a, const FrameSequence& b, const FrameDistance& dist);

// DTW restricted to a window. The window must admit a path.
DtwResult dtw_windowed(const FrameSequence& a, const FrameSequence& b,
                       const FrameDistance& dist, const SearchWindow& window);

// Pairwise frame means; an odd trailing frame is kept as is.
FrameSequence coarsen(const FrameSequence& a);

inline constexpr std::size_t kDefaultFastDtwRadius = 2;

DtwResult fast_dtw(const FrameSequence& a, const FrameSequence& b, std::size_t radius,
                   const FrameDistance& dist);

// Path-length normalized FastDTW cost between Mel frame columns.
double dtw_score(const MelSpectrogram& user, const MelSpectrogram& tts,
                 std::size_t radius = kDefaultFastDtwRadius);

DetectionVerdict dtw_detect(const MelSpectrogram& user, const MelSpectrogram& tts,
                            double threshold, std::size_t radius = kDefaultFastDtwRadius);

}  // namespace pronlearn

#endif  // PRONLEARN_DTW_HPP_
