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

#include "pronlearn/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pronlearn/errors.hpp"

namespace pronlearn {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

void fill_rates(PrPoint& p) {
  p.precision = p.tp + p.fp == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
  p.recall = p.tp + p.fn == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn);
}

void check_scores(std::span<const ScoredPair> pairs, const char* op) {
  if (pairs.empty()) throw InvalidArgument(std::string(op) + ": no scored pairs");
  for (const auto& p : pairs) {
    if (!std::isfinite(p.score)) throw NumericError(std::string(op) + ": non-finite score");
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

PrPoint evaluate_at(std::span<const ScoredPair> pairs, double threshold) {
  check_scores(pairs, "evaluate_at");
  PrPoint p;
  p.threshold = threshold;
  for (const auto& s : pairs) {
    const bool flagged = s.score > threshold;
    if (flagged && s.label) ++p.tp;
    if (flagged && !s.label) ++p.fp;
    if (!flagged && s.label) ++p.fn;
    if (!flagged && !s.label) ++p.tn;
  }
  fill_rates(p);
  return p;
}

std::vector<PrPoint> pr_curve(std::span<const ScoredPair> pairs) {
  check_scores(pairs, "pr_curve");
  std::vector<ScoredPair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredPair& a, const ScoredPair& b) { return a.score < b.score; });
  std::size_t positives = 0;
  for (const auto& s : sorted) positives += s.label;
  const std::size_t negatives = sorted.size() - positives;

  // Sweep upward: everything at or below the threshold is predicted negative.
  std::vector<PrPoint> curve;
  PrPoint p;
  p.threshold = -kInf;
  p.tp = positives;
  p.fp = negatives;
  fill_rates(p);
  curve.push_back(p);
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      if (sorted[j].label) {
        --p.tp;
        ++p.fn;
      } else {
        --p.fp;
        ++p.tn;
      }
      ++j;
    }
    p.threshold = j < sorted.size() ? sorted[i].score + (sorted[j].score - sorted[i].score) / 2.0
                                    : kInf;
    fill_rates(p);
    curve.push_back(p);
    i = j;
  }
  return curve;
}

PrPoint choose_threshold(std::span<const PrPoint> curve, double target_precision) {
  if (curve.empty()) throw InvalidArgument("choose_threshold: empty curve");
  if (!std::isfinite(target_precision)) {
    throw InvalidArgument("choose_threshold: target precision must be finite");
  }
  const PrPoint* best = nullptr;
  for (const auto& p : curve) {
    if (p.precision < target_precision) continue;
    if (best == nullptr || p.recall > best->recall ||
        (p.recall == best->recall &&
         (p.precision > best->precision ||
          (p.precision == best->precision && p.threshold < best->threshold)))) {
      best = &p;
    }
  }
  if (best == nullptr) {
    throw CalibrationInfeasible("no threshold reaches precision " + fixed(target_precision, 4));
  }
  return *best;
}

int likert_score(const PhonemeSequence& heard, const PhonemeSequence& reference) {
  if (heard == reference) return 3;
  return normalized_distance(heard, reference) <= 0.5 ? 2 : 1;
}

LikertSummary likert_report(std::span<const int> scores, std::span<const bool> correct) {
  if (scores.empty()) throw InvalidArgument("likert_report: no entities");
  if (scores.size() != correct.size()) {
    throw InvalidArgument("likert_report: scores and flags differ in length");
  }
  double sum = 0.0, hits = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < 1 || scores[i] > 3) {
      throw InvalidArgument("likert_report: score " + std::to_string(scores[i]) + " outside 1..3");
    }
    sum += scores[i];
    hits += correct[i];
  }
  const double n = static_cast<double>(scores.size());
  return {100.0 * hits / n, sum / n};
}

void finalize(MethodReport& report) {
  report.mean_precision = report.mean_recall = report.mean_percent = report.mean_likert = 0.0;
  report.pooled = PrPoint{};
  report.pooled.threshold = report.threshold;
  if (report.locales.empty()) return;
  for (const auto& [locale, r] : report.locales) {
    report.mean_precision += r.intrinsic.precision;
    report.mean_recall += r.intrinsic.recall;
    report.mean_percent += r.extrinsic.percent;
    report.mean_likert += r.extrinsic.mean_likert;
    report.pooled.tp += r.intrinsic.tp;
    report.pooled.fp += r.intrinsic.fp;
    report.pooled.fn += r.intrinsic.fn;
    report.pooled.tn += r.intrinsic.tn;
  }
  const double n = static_cast<double>(report.locales.size());
  report.mean_precision /= n;
  report.mean_recall /= n;
  report.mean_percent /= n;
  report.mean_likert /= n;
  fill_rates(report.pooled);
}

Json threshold_to_json(double threshold) {
  if (std::isinf(threshold)) return threshold > 0 ? "inf" : "-inf";
  if (std::isnan(threshold)) throw NumericError("threshold is NaN");
  return threshold;
}

double threshold_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw InvalidArgument("bad threshold '" + s + "'");
  }
  if (!j.is_number()) throw InvalidArgument("threshold must be a number or \"inf\"/\"-inf\"");
  return j.get<double>();
}

Json to_json(const PrPoint& p) {
  return Json{{"threshold", threshold_to_json(p.threshold)},
              {"precision", p.precision},
              {"recall", p.recall},
              {"tp", p.tp},
              {"fp", p.fp},
              {"fn", p.fn},
              {"tn", p.tn}};
}

Json to_json(const EvalReport& report) {
  Json methods = Json::object();
  for (const auto& [name, m] : report.methods) {
    Json locales = Json::object();
    for (const auto& [locale, r] : m.locales) {
      locales[locale] = Json{{"items", r.items},
                             {"intrinsic", to_json(r.intrinsic)},
                             {"extrinsic", {{"percent", r.extrinsic.percent},
                                            {"mean_likert", r.extrinsic.mean_likert}}}};
    }
    methods[name] = Json{{"threshold", threshold_to_json(m.threshold)},
                         {"locales", std::move(locales)},
                         {"average", {{"precision", m.mean_precision},
                                      {"recall", m.mean_recall},
                                      {"percent", m.mean_percent},
                                      {"mean_likert", m.mean_likert}}},
                         {"pooled", to_json(m.pooled)}};
  }
  return Json{{"version", 1}, {"split", report.split}, {"methods", std::move(methods)}};
}

std::string format_table(const EvalReport& report) {
  std::string out;
  char line[160];
  for (const auto& [name, m] : report.methods) {
    out += name + " (" + report.split + " split)\n";
    std::snprintf(line, sizeof line, "  %-8s %7s %9s %8s %10s %8s\n", "locale", "items",
                  "precision", "recall", "accuracy%", "likert");
    out += line;
    const auto row = [&](const std::string& label, std::size_t items, double p, double r,
                         double pct, double lik) {
      std::snprintf(line, sizeof line, "  %-8s %7zu %9.4f %8.4f %10.2f %8.3f\n", label.c_str(),
                    items, p, r, pct, lik);
      out += line;
    };
    std::size_t total = 0;
    for (const auto& [locale, r] : m.locales) {
      row(locale, r.items, r.intrinsic.precision, r.intrinsic.recall, r.extrinsic.percent,
          r.extrinsic.mean_likert);
      total += r.items;
    }
    row("average", total, m.mean_precision, m.mean_recall, m.mean_percent, m.mean_likert);
  }
  return out;
}

}  // namespace pronlearn
