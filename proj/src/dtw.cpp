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

#include "pronlearn/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pronlearn/errors.hpp"

namespace pronlearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const FrameSequence& a, const FrameSequence& b) {
  if (a.cols() == 0 || b.cols() == 0) throw InvalidArgument("dtw: empty frame sequence");
  if (a.rows() != b.rows()) {
    throw InvalidArgument("dtw: frame dimension mismatch (" + std::to_string(a.rows()) + " vs " +
                          std::to_string(b.rows()) + ")");
  }
}

// Rows of a windowed cost matrix, each storing columns [lo, hi].
class BandMatrix {
 public:
  explicit BandMatrix(const SearchWindow& window) : window_(window), offsets_(window.size() + 1) {
    for (std::size_t i = 0; i < window.size(); ++i) {
      offsets_[i + 1] = offsets_[i] + (window[i].second - window[i].first + 1);
    }
    cells_.assign(offsets_.back(), kInf);
  }

  bool contains(std::size_t i, std::size_t j) const {
    return j >= window_[i].first && j <= window_[i].second;
  }
  double get(std::size_t i, std::size_t j) const {
    return contains(i, j) ? cells_[offsets_[i] + j - window_[i].first] : kInf;
  }
  double& at(std::size_t i, std::size_t j) { return cells_[offsets_[i] + j - window_[i].first]; }

 private:
  const SearchWindow& window_;
  std::vector<std::size_t> offsets_;
  std::vector<double> cells_;
};

SearchWindow full_window(std::size_t n, std::size_t m) {
  return SearchWindow(n, {0, m - 1});
}

void check_window(const SearchWindow& window, std::size_t n, std::size_t m) {
  if (window.size() != n) throw InvalidArgument("dtw: window row count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = window[i];
    if (lo > hi || hi >= m) throw InvalidArgument("dtw: malformed window row");
    if (i > 0 && (hi < window[i - 1].second || lo > window[i - 1].second + 1)) {
      throw InvalidArgument("dtw: window admits no path");
    }
  }
  if (window.front().first != 0 || window.back().second != m - 1) {
    throw InvalidArgument("dtw: window misses a corner");
  }
}

// Per-row bounds of the low-resolution path grown by the radius, projected
// to twice the resolution and repaired so that a path always exists.
SearchWindow expand_window(const WarpPath& low, std::size_t radius, std::size_t low_n,
                           std::size_t low_m, std::size_t n, std::size_t m) {
  std::vector<std::size_t> low_lo(low_n, low_m), low_hi(low_n, 0);
  for (const auto& [pi, pj] : low) {
    const std::size_t i0 = pi >= radius ? pi - radius : 0;
    const std::size_t i1 = std::min(low_n - 1, pi + radius);
    const std::size_t j0 = pj >= radius ? pj - radius : 0;
    const std::size_t j1 = std::min(low_m - 1, pj + radius);
    for (std::size_t i = i0; i <= i1; ++i) {
      low_lo[i] = std::min(low_lo[i], j0);
      low_hi[i] = std::max(low_hi[i], j1);
    }
  }

  SearchWindow window(n, {m, 0});
  for (std::size_t li = 0; li < low_n; ++li) {
    if (low_lo[li] > low_hi[li]) continue;
    const std::size_t lo = 2 * low_lo[li];
    const std::size_t hi = std::min(m - 1, 2 * low_hi[li] + 1);
    for (std::size_t i = 2 * li; i <= std::min(n - 1, 2 * li + 1); ++i) {
      window[i].first = std::min(window[i].first, lo);
      window[i].second = std::max(window[i].second, hi);
    }
  }

  window.front().first = 0;
  window.back().second = m - 1;
  for (std::size_t i = 0; i < n; ++i) {
    auto& [lo, hi] = window[i];
    if (lo >= m) lo = i > 0 ? window[i - 1].second : 0;
    if (i > 0) {
      hi = std::max(hi, window[i - 1].second);
      lo = std::min(lo, window[i - 1].second + 1);
    }
    hi = std::max(hi, lo);
  }
  return window;
}

}  // namespace

double euclidean_distance(const FrameRef& a, const FrameRef& b) { return (a - b).norm(); }

double squared_euclidean_distance(const FrameRef& a, const FrameRef& b) {
  return (a - b).squaredNorm();
}

double manhattan_distance(const FrameRef& a, const FrameRef& b) {
  return (a - b).cwiseAbs().sum();
}

bool is_valid_path(const WarpPath& path, std::size_t len_a, std::size_t len_b) {
  if (path.empty() || len_a == 0 || len_b == 0) return false;
  if (path.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (path.back() != std::pair<std::size_t, std::size_t>{len_a - 1, len_b - 1}) return false;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const auto [pi, pj] = path[k - 1];
    const auto [i, j] = path[k];
    if (i < pi || j < pj) return false;
    const std::size_t di = i - pi, dj = j - pj;
    if (di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

DtwResult dtw_windowed(const FrameSequence& a, const FrameSequence& b,
                       const FrameDistance& dist, const SearchWindow& window) {
  check_inputs(a, b);
  const auto n = static_cast<std::size_t>(a.cols());
  const auto m = static_cast<std::size_t>(b.cols());
  check_window(window, n, m);

  BandMatrix acc(window);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = window[i].first; j <= window[i].second; ++j) {
      const double d = dist(a.col(static_cast<Eigen::Index>(i)), b.col(static_cast<Eigen::Index>(j)));
      if (!(d >= 0.0) || !std::isfinite(d)) {
        throw NumericError("dtw: frame distance must be finite and non-negative");
      }
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0 && j > 0) best = acc.get(i - 1, j - 1);
        if (i > 0) best = std::min(best, acc.get(i - 1, j));
        if (j > 0) best = std::min(best, acc.get(i, j - 1));
      }
      acc.at(i, j) = best + d;
    }
  }

  DtwResult result;
  result.cost = acc.get(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = acc.get(i - 1, j - 1);
      const double up = acc.get(i - 1, j);
      const double left = acc.get(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

DtwResult dtw(const FrameSequence& a, const FrameSequence& b, const FrameDistance& dist) {
  check_inputs(a, b);
  return dtw_windowed(a, b, dist,
                      full_window(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols())));
}

FrameSequence coarsen(const FrameSequence& a) {
  const Eigen::Index n = a.cols();
  FrameSequence out(a.rows(), (n + 1) / 2);
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    out.col(k) = 2 * k + 1 < n ? ((a.col(2 * k) + a.col(2 * k + 1)) * 0.5).eval()
                               : a.col(2 * k).eval();
  }
  return out;
}

DtwResult fast_dtw(const FrameSequence& a, const FrameSequence& b, std::size_t radius,
                   const FrameDistance& dist) {
  check_inputs(a, b);
  const auto n = static_cast<std::size_t>(a.cols());
  const auto m = static_cast<std::size_t>(b.cols());
  const std::size_t min_size = radius + 2;
  if (n <= min_size || m <= min_size) return dtw(a, b, dist);

  const FrameSequence low_a = coarsen(a);
  const FrameSequence low_b = coarsen(b);
  const DtwResult low = fast_dtw(low_a, low_b, radius, dist);
  const SearchWindow window =
      expand_window(low.path, radius, static_cast<std::size_t>(low_a.cols()),
                    static_cast<std::size_t>(low_b.cols()), n, m);
  return dtw_windowed(a, b, dist, window);
}

double dtw_score(const MelSpectrogram& user, const MelSpectrogram& tts, std::size_t radius) {
  if (user.n_mels() != tts.n_mels()) {
    throw InvalidArgument("dtw_detect: n_mels mismatch (" + std::to_string(user.n_mels()) + " vs " +
                          std::to_string(tts.n_mels()) + ")");
  }
  return fast_dtw(user.log_mel, tts.log_mel, radius, euclidean_distance).normalized_cost();
}

DetectionVerdict dtw_detect(const MelSpectrogram& user, const MelSpectrogram& tts,
                            double threshold, std::size_t radius) {
  return make_verdict(dtw_score(user, tts, radius), threshold);
}

}  // namespace pronlearn
