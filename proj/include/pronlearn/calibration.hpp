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

#ifndef PRONLEARN_CALIBRATION_HPP_
#define PRONLEARN_CALIBRATION_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pronlearn/phoneme.hpp"

namespace pronlearn {

// Higher score = more likely mispronounced; label true = mispronounced.
struct ScoredPair {
  double score = 0.0;
  bool label = false;
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 1.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  bool operator==(const PrPoint&) const = default;
};

// Confusion counts with "positive iff score > threshold".
PrPoint evaluate_at(std::span<const ScoredPair> pairs, double threshold);

// Candidate thresholds are -inf, the midpoints between consecutive distinct
// scores and +inf, in ascending order.
std::vector<PrPoint> pr_curve(std::span<const ScoredPair> pairs);

// The qualifying point (precision >= target) with the highest recall, then
// the highest precision, then the lowest threshold. Throws
// CalibrationInfeasible when no point qualifies.
PrPoint choose_threshold(std::span<const PrPoint> curve, double target_precision);

// 3 when the pronunciations match, 2 when normalized edit distance <= 0.5, else 1.
int likert_score(const PhonemeSequence& heard, const PhonemeSequence& reference);

struct LikertSummary {
  double percent = 0.0;
  double mean_likert = 0.0;
};

LikertSummary likert_report(std::span<const int> scores, std::span<const bool> correct);

struct LocaleReport {
  PrPoint intrinsic;
  LikertSummary extrinsic;
  std::size_t items = 0;
};

struct MethodReport {
  double threshold = 0.0;
  std::map<std::string, LocaleReport> locales;
  // Unweighted means over locales.
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_percent = 0.0;
  double mean_likert = 0.0;
  PrPoint pooled;  // all items together
};

struct EvalReport {
  std::string split;
  std::map<std::string, MethodReport> methods;
};

void finalize(MethodReport& report);

// Infinite thresholds are written as the strings "inf" and "-inf".
nlohmann::ordered_json threshold_to_json(double threshold);
double threshold_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const PrPoint& p);
nlohmann::ordered_json to_json(const EvalReport& report);
std::string format_table(const EvalReport& report);

}  // namespace pronlearn

#endif  // PRONLEARN_CALIBRATION_HPP_
