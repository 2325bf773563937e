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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pronlearn/calibration.hpp"
#include "pronlearn/correction.hpp"
#include "pronlearn/datagen.hpp"
#include "pronlearn/dtw.hpp"
#include "pronlearn/dtw_siamese.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/mel_siamese.hpp"
#include "pronlearn/methods.hpp"
#include "pronlearn/metric.hpp"
#include "pronlearn/nn/gradcheck.hpp"
#include "pronlearn/phoneme.hpp"
#include "pronlearn/rng.hpp"
#include "support/files.hpp"
#include "support/metric_oracle.hpp"

using namespace pronlearn;
namespace fs = std::filesystem;
using pronlearn::testing::ScratchDir;
using pronlearn::testing::tree_contents;

namespace {

// Pinned tolerances.
constexpr double kAudioPrecision = 0.90;
constexpr double kAudioRecallGain = 0.20;
constexpr double kPhonemePrecision = 0.95;
constexpr double kPhonemeRecallGain = 0.10;
constexpr int kOracleInstances = 25;
constexpr double kOracleTolerance = 1e-4;
constexpr double kOracleSeconds = 60.0;
constexpr std::size_t kMinMetricUpdates = 1000;
constexpr double kSymmetryTolerance = 1e-9;
constexpr int kBruteForceInstances = 50;
constexpr std::size_t kBruteForceMaxLength = 6;
constexpr int kFastDtwInstances = 20;
constexpr int kBypassPairs = 20;
constexpr double kBypassTolerance = 1e-9;
constexpr double kGradTolerance = 1e-3;
constexpr std::uint64_t kGradSeeds = 5;
constexpr double kMaxKinkFraction = 0.01;  // ReLU/max-pool coordinates the conv check may skip
constexpr int kAxiomTrials = 1000;
constexpr double kCalibrationTarget = 0.95;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Precision and recall at `threshold`, counted directly from the items.
PrPoint recount(std::span<const ScoredItem> items, double threshold) {
  PrPoint p;
  p.threshold = threshold;
  for (const auto& it : items) {
    const bool flagged = it.score > threshold;
    const bool label = it.example->label;
    if (flagged && label) ++p.tp;
    if (flagged && !label) ++p.fp;
    if (!flagged && label) ++p.fn;
    if (!flagged && !label) ++p.tn;
  }
  p.precision = p.tp + p.fp == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
  p.recall = p.tp + p.fn == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn);
  return p;
}

struct Calibrated {
  std::vector<ScoredItem> calibration;
  std::vector<ScoredItem> eval;
  PrPoint chosen;
};

Calibrated calibrate(const Detector& detector, const Corpus& corpus, double target) {
  Calibrated c;
  c.calibration = score_split(detector, corpus, Split::kCalibration);
  c.eval = score_split(detector, corpus, Split::kEval);
  c.chosen = choose_threshold(pr_curve(scored_pairs(c.calibration)), target);
  return c;
}

struct UpdateAudit {
  std::size_t count = 0;
  double worst_min_eigenvalue = std::numeric_limits<double>::infinity();
  double worst_symmetry = 0.0;
};

// The standard audio corpus and a DTW-SiameseNet trained on it; shared by
// several criteria.
struct AudioFixture {
  ScratchDir dir{"acceptance-audio"};
  Corpus corpus;
  UpdateAudit audit;
  std::unique_ptr<Detector> siamese;

  AudioFixture() {
    DatasetSpec spec = DatasetSpec::audio_defaults();
    spec.seed = 7;
    corpus = generate_corpus(spec);
    TrainOptions options;
    options.seed = 7;
    options.observer = [this](const MetricUpdateEvent& ev) {
      const Eigen::MatrixXd& a = *ev.metric;
      const double sym = (a - a.transpose()).cwiseAbs().maxCoeff();
      const Eigen::MatrixXd s = 0.5 * (a + a.transpose());
      const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues().minCoeff();
      ++audit.count;
      audit.worst_min_eigenvalue = std::min(audit.worst_min_eigenvalue, min_eig);
      audit.worst_symmetry = std::max(audit.worst_symmetry, sym);
    };
    train_method(Method::kDtwSiamese, corpus, dir.path / "dtw-siamese", options);
    siamese = make_detector(Method::kDtwSiamese, dir.path / "dtw-siamese");
  }
};

struct PhonemeFixture {
  ScratchDir dir{"acceptance-phoneme"};
  Corpus corpus;
  std::unique_ptr<Detector> gbdt;

  PhonemeFixture() {
    corpus = generate_corpus(homograph_heavy_spec());
    train_method(Method::kGbdt, corpus, dir.path / "gbdt", {});
    gbdt = make_detector(Method::kGbdt, dir.path / "gbdt");
  }
};

AudioFixture& audio() {
  static AudioFixture fixture;
  return fixture;
}

PhonemeFixture& phoneme() {
  static PhonemeFixture fixture;
  return fixture;
}

Outcome audio_ordering() {
  AudioFixture& f = audio();
  const Calibrated ds = calibrate(*f.siamese, f.corpus, kAudioPrecision);
  const Calibrated exact = calibrate(*make_detector(Method::kDtw), f.corpus, kAudioPrecision);
  const Calibrated fast = calibrate(*make_detector(Method::kFastDtw), f.corpus, kAudioPrecision);
  const double raw = std::max(exact.chosen.recall, fast.chosen.recall);
  const double gain = ds.chosen.recall - raw;
  const PrPoint ds_eval = recount(ds.eval, ds.chosen.threshold);
  const PrPoint raw_eval = recount(exact.eval, exact.chosen.threshold);
  return {ds.chosen.precision >= kAudioPrecision && gain >= kAudioRecallGain,
          fmt("calibration: dtw-siamese P %.3f R %.3f, dtw R %.3f, fastdtw R %.3f, gain %.3f; "
              "eval: dtw-siamese P %.3f R %.3f, dtw P %.3f R %.3f",
              ds.chosen.precision, ds.chosen.recall, exact.chosen.recall, fast.chosen.recall, gain,
              ds_eval.precision, ds_eval.recall, raw_eval.precision, raw_eval.recall)};
}

Outcome phoneme_ordering() {
  PhonemeFixture& f = phoneme();
  const Calibrated gbdt = calibrate(*f.gbdt, f.corpus, kPhonemePrecision);
  const Calibrated p2p = calibrate(*make_detector(Method::kP2p), f.corpus, kPhonemePrecision);
  const double gain = gbdt.chosen.recall - p2p.chosen.recall;
  const PrPoint gbdt_eval = recount(gbdt.eval, gbdt.chosen.threshold);
  const PrPoint p2p_eval = recount(p2p.eval, p2p.chosen.threshold);
  return {gbdt.chosen.precision >= kPhonemePrecision && p2p.chosen.precision >= kPhonemePrecision &&
              gain >= kPhonemeRecallGain,
          fmt("calibration: gbdt P %.3f R %.3f, p2p P %.3f R %.3f, gain %.3f; "
              "eval: gbdt P %.3f R %.3f, p2p P %.3f R %.3f",
              gbdt.chosen.precision, gbdt.chosen.recall, p2p.chosen.precision, p2p.chosen.recall,
              gain, gbdt_eval.precision, gbdt_eval.recall, p2p_eval.precision, p2p_eval.recall)};
}

Outcome metric_oracle() {
  using pronlearn::testing::minimize_metric_step;
  using pronlearn::testing::random_pd;
  using pronlearn::testing::random_vector;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(31);
  double worst = 0.0;
  int rejected = 0;
  for (int trial = 0; trial < kOracleInstances; ++trial) {
    const Eigen::MatrixXd a_t = random_pd(rng, 3);
    const Eigen::VectorXd u = random_vector(rng, 3, 0.7);
    const Eigen::VectorXd v = random_vector(rng, 3, 0.7);
    const MetricUpdate upd = update_metric(a_t, u, v, 0.1);
    if (!upd.accepted) {
      ++rejected;
      continue;
    }
    const Eigen::MatrixXd oracle = minimize_metric_step(a_t, u, v, upd.eta);
    worst = std::max(worst, (upd.metric - oracle).cwiseAbs().maxCoeff());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {rejected == 0 && worst < kOracleTolerance && seconds < kOracleSeconds,
          fmt("%d instances, max |closed form - numerical| %.2e, %.2f s", kOracleInstances, worst, seconds)};
}

Outcome pd_preservation() {
  const UpdateAudit& a = audio().audit;
  return {a.count >= kMinMetricUpdates && a.worst_min_eigenvalue > 0.0 &&
              a.worst_symmetry < kSymmetryTolerance,
          fmt("%zu updates during training, smallest eigenvalue %.3e, max symmetry error %.2e",
              a.count, a.worst_min_eigenvalue, a.worst_symmetry)};
}

FrameSequence random_frames(Rng& rng, std::size_t dim, std::size_t len) {
  FrameSequence s(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(len));
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    for (Eigen::Index r = 0; r < s.rows(); ++r) s(r, c) = rng.uniform(-2.0, 2.0);
  return s;
}

// Walks every monotone path from (0, 0), summing distances in path order.
void enumerate_paths(const FrameSequence& a, const FrameSequence& b, std::size_t i, std::size_t j,
                     double prefix, double& best) {
  const double total =
      prefix + euclidean_distance(a.col(static_cast<Eigen::Index>(i)), b.col(static_cast<Eigen::Index>(j)));
  const auto n = static_cast<std::size_t>(a.cols());
  const auto m = static_cast<std::size_t>(b.cols());
  if (i + 1 == n && j + 1 == m) {
    best = std::min(best, total);
    return;
  }
  if (i + 1 < n) enumerate_paths(a, b, i + 1, j, total, best);
  if (j + 1 < m) enumerate_paths(a, b, i, j + 1, total, best);
  if (i + 1 < n && j + 1 < m) enumerate_paths(a, b, i + 1, j + 1, total, best);
}

Outcome dtw_oracle() {
  Rng rng(55);
  int brute_mismatches = 0;
  for (int trial = 0; trial < kBruteForceInstances; ++trial) {
    const FrameSequence a = random_frames(rng, 3, 1 + rng.index(kBruteForceMaxLength));
    const FrameSequence b = random_frames(rng, 3, 1 + rng.index(kBruteForceMaxLength));
    double best = std::numeric_limits<double>::infinity();
    enumerate_paths(a, b, 0, 0, 0.0, best);
    brute_mismatches += dtw(a, b, euclidean_distance).cost != best;
  }
  int fast_mismatches = 0;
  for (int trial = 0; trial < kFastDtwInstances; ++trial) {
    const std::size_t n = 1 + rng.index(50);
    const std::size_t m = 1 + rng.index(50);
    const FrameSequence a = random_frames(rng, 3, n);
    const FrameSequence b = random_frames(rng, 3, m);
    fast_mismatches += fast_dtw(a, b, std::max(n, m), euclidean_distance).cost !=
                       dtw(a, b, euclidean_distance).cost;
  }
  return {brute_mismatches == 0 && fast_mismatches == 0,
          fmt("exact vs enumeration: %d/%d differ; fast_dtw (radius = max length) vs exact: %d/%d differ",
              brute_mismatches, kBruteForceInstances, fast_mismatches, kFastDtwInstances)};
}

Outcome bypass_reduction() {
  Rng rng(66);
  const std::size_t n_mels = 40;
  const DtwSiameseModel identity = DtwSiameseModel::identity(n_mels, 1);
  double worst = 0.0;
  for (int trial = 0; trial < kBypassPairs; ++trial) {
    MelSpectrogram a, b;
    a.log_mel = random_frames(rng, n_mels, 5 + rng.index(60)) * 3.0;
    b.log_mel = random_frames(rng, n_mels, 5 + rng.index(60)) * 3.0;
    const double learned = learned_dtw(a, b, identity).cost;
    const double baseline = dtw(a.log_mel, b.log_mel, squared_euclidean_distance).cost;
    worst = std::max(worst, std::abs(learned - baseline));
  }
  return {worst < kBypassTolerance, fmt("%d pairs, max difference %.2e", kBypassPairs, worst)};
}

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

Outcome gradient_suite() {
  double worst = 0.0;
  std::string worst_name;
  const auto record = [&](const std::string& name, const nn::GradCheckResult& r) {
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_name = name + " (" + r.worst_parameter + ")";
    }
  };
  std::size_t checks = 0;
  std::size_t conv_checked = 0;
  std::size_t conv_kinks = 0;
  for (nn::Primitive p : nn::all_primitives()) {
    for (std::uint64_t seed = 1; seed <= kGradSeeds; ++seed) {
      record(nn::primitive_name(p), nn::grad_check_primitive(p, seed));
      ++checks;
    }
  }
  for (std::uint64_t seed = 1; seed <= kGradSeeds; ++seed) {
    Rng rng(seed + 500);
    EncoderConfig c;
    c.n_mels = 5;
    c.window = 3;
    c.hidden = 4;
    c.output_dim = 3;
    TwinEncoder encoder(c, seed);
    std::vector<Triplet> triplets;
    for (int k = 0; k < 3; ++k) {
      triplets.push_back({random_matrix(rng, 3, 5, 2.0), random_matrix(rng, 3, 5, 2.0),
                          random_matrix(rng, 3, 5, 2.0)});
    }
    const Eigen::MatrixXd metric = pronlearn::testing::random_pd(rng, 3);
    record("triplet objective", nn::grad_check(encoder.parameters(), [&](nn::Graph& g) {
             return triplet_objective(g, encoder, metric, triplets, 1.0, false);
           }));
    const std::vector<Eigen::MatrixXd> windows{triplets[0].anchor, triplets[1].negative};
    const WindowBatch batch = stack_windows(windows);
    const nn::Tensor weights({2, 3}, std::vector<double>{0.3, -1.2, 0.7, 1.1, 0.4, -0.5});
    record("twin encoder", nn::grad_check(encoder.parameters(), [&](nn::Graph& g) {
             return nn::weighted_sum(encoder.forward(g, batch), weights);
           }));

    ConvSiameseConfig conv;
    conv.n_mels = 8;
    conv.n_frames = 16;
    conv.filters = 3;
    conv.hidden = 4;
    conv.seed = seed;
    ConvTwinNet net(conv);
    const Eigen::MatrixXd a = random_matrix(rng, 8, 16, 3.0);
    const Eigen::MatrixXd b = random_matrix(rng, 8, 16, 3.0);
    const std::vector<double> label = {seed % 2 == 0 ? 1.0 : 0.0};
    const nn::GradCheckResult conv_result = nn::grad_check(
        net.parameters(),
        [&](nn::Graph& g) { return nn::sigmoid_cross_entropy(net.logit(g, a, b), label); }, 1e-4,
        kGradTolerance);
    conv_checked += conv_result.checked;
    conv_kinks += conv_result.kinks;
    record("conv siamese", conv_result);
    checks += 3;
  }
  const double kink_fraction =
      static_cast<double>(conv_kinks) / static_cast<double>(conv_checked + conv_kinks);
  return {worst < kGradTolerance && kink_fraction <= kMaxKinkFraction,
          fmt("%zu checks, worst relative error %.2e in %s; conv kinks skipped %zu of %zu", checks,
              worst, worst_name.c_str(), conv_kinks, conv_checked + conv_kinks)};
}

Outcome metric_axioms() {
  using pronlearn::testing::random_pd;
  using pronlearn::testing::random_vector;
  Rng rng(88);
  const auto random_seq = [&](std::size_t alphabet) {
    std::vector<int> s(rng.index(9));
    for (int& x : s) x = static_cast<int>(rng.index(alphabet));
    return s;
  };
  int lev_failures = 0;
  for (int trial = 0; trial < kAxiomTrials; ++trial) {
    const auto a = random_seq(4), b = random_seq(4), c = random_seq(4);
    const std::size_t ab = levenshtein(a, b), ba = levenshtein(b, a);
    const std::size_t bc = levenshtein(b, c), ac = levenshtein(a, c);
    lev_failures += ab != ba || levenshtein(a, a) != 0 || (ab == 0) != (a == b) || ac > ab + bc;
  }
  int maha_failures = 0;
  for (int trial = 0; trial < kAxiomTrials; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(6));
    const Eigen::MatrixXd a = random_pd(rng, d, 1e-3);
    const Eigen::VectorXd x = random_vector(rng, d, 3.0);
    const Eigen::VectorXd y = random_vector(rng, d, 3.0);
    const double xy = mahalanobis(a, x, y);
    maha_failures += xy < 0.0 || xy != mahalanobis(a, y, x) || mahalanobis(a, x, x) != 0.0;
  }
  int logdet_failures = 0;
  double worst_self = 0.0;
  for (int trial = 0; trial < kAxiomTrials; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(5));
    const Eigen::MatrixXd a = random_pd(rng, d);
    const Eigen::MatrixXd b = random_pd(rng, d);
    const double self = logdet_div(a, a);
    worst_self = std::max(worst_self, std::abs(self));
    logdet_failures += std::abs(self) > 1e-9 || !(logdet_div(a, b) > 0.0);
  }
  return {lev_failures == 0 && maha_failures == 0 && logdet_failures == 0,
          fmt("%d trials each; failures: levenshtein %d, mahalanobis %d, logdet %d (max |D(A,A)| %.1e)",
              kAxiomTrials, lev_failures, maha_failures, logdet_failures, worst_self)};
}

Outcome calibration_contract() {
  AudioFixture& af = audio();
  PhonemeFixture& pf = phoneme();
  ScratchDir dir("acceptance-mel");
  TrainOptions options;
  options.epochs = 2;
  train_method(Method::kMelSiamese, af.corpus, dir.path, options);

  struct Entry {
    Method method;
    const Detector* detector;
    const Corpus* corpus;
  };
  std::vector<std::unique_ptr<Detector>> owned;
  const auto own = [&](std::unique_ptr<Detector> d) {
    owned.push_back(std::move(d));
    return owned.back().get();
  };
  const std::vector<Entry> entries = {
      {Method::kP2p, own(make_detector(Method::kP2p)), &pf.corpus},
      {Method::kGbdt, pf.gbdt.get(), &pf.corpus},
      {Method::kOracle, own(make_detector(Method::kOracle)), &pf.corpus},
      {Method::kDtw, own(make_detector(Method::kDtw)), &af.corpus},
      {Method::kFastDtw, own(make_detector(Method::kFastDtw)), &af.corpus},
      {Method::kMelSiamese, own(make_detector(Method::kMelSiamese, dir.path)), &af.corpus},
      {Method::kDtwSiamese, af.siamese.get(), &af.corpus},
  };
  bool pass = true;
  std::string detail;
  for (const auto& e : entries) {
    const auto items = score_split(*e.detector, *e.corpus, Split::kCalibration);
    std::string line;
    try {
      const PrPoint chosen = choose_threshold(pr_curve(scored_pairs(items)), kCalibrationTarget);
      const PrPoint counted = recount(items, chosen.threshold);
      const bool ok = counted.precision >= kCalibrationTarget && counted.tp == chosen.tp &&
                      counted.fp == chosen.fp;
      pass = pass && ok;
      line = fmt("%s P %.3f R %.3f%s", std::string(to_string(e.method)).c_str(), counted.precision,
                 counted.recall, ok ? "" : " MISMATCH");
    } catch (const CalibrationInfeasible&) {
      line = std::string(to_string(e.method)) + " unattainable";
    }
    detail += (detail.empty() ? "" : "; ") + line;
  }
  return {pass, detail};
}

// Checks one simulation against an independent recount, user isolation and
// a byte-exact reload of the store.
std::string audit_simulation(const Detector& detector, const Corpus& corpus, double threshold,
                             const fs::path& store_path, bool& pass) {
  CorrectionPolicy policy;
  SimulationReport report;
  std::vector<PronunciationRecord> written;
  std::map<std::string, std::set<std::string>> expected_by_user;
  {
    PronunciationStore store = PronunciationStore::open(store_path);
    report = simulate_corrections(detector, corpus, Split::kEval, threshold, policy, store);
    std::set<std::string> users;
    for (const auto& o : report.outcomes) users.insert(o.user_id);
    for (const auto& u : users) {
      for (auto& r : store.records_for(u)) written.push_back(std::move(r));
    }
  }

  std::size_t k = 0, mismatches = 0, corrections = 0;
  for (const auto& e : corpus.examples) {
    if (e.split != Split::kEval) continue;
    const SimulationOutcome& o = report.outcomes.at(k++);
    std::size_t qualified = 0;
    for (const auto& s : e.signals) {
      qualified += s.completed && s.duration_seconds >= policy.min_duration_seconds;
    }
    const bool expected = o.score > threshold && qualified >= policy.min_qualified_events;
    mismatches += o.example_id != e.id || o.corrected != expected;
    corrections += expected;
    if (expected) expected_by_user[e.user_id].insert(e.id);
  }

  const std::string before = pronlearn::testing::slurp(store_path);
  const PronunciationStore reloaded = PronunciationStore::open(store_path);
  const bool bytes_kept = pronlearn::testing::slurp(store_path) == before;
  std::size_t reload_mismatches = 0;
  for (const auto& r : written) reload_mismatches += reloaded.get(r.user_id, r.entity_id) != r;

  std::size_t leaks = 0;
  for (const auto& [user, entities] : expected_by_user) {
    std::set<std::string> seen;
    for (const auto& r : reloaded.records_for(user)) {
      leaks += r.user_id != user;
      seen.insert(r.entity_id);
    }
    leaks += seen != entities;
  }
  // A correction for one user must be invisible to every other user.
  for (const auto& r : written) {
    for (const auto& [user, entities] : expected_by_user) {
      if (user != r.user_id) leaks += reloaded.get(user, r.entity_id).has_value();
    }
  }

  const bool ok = mismatches == 0 && report.corrections == corrections && corrections > 0 &&
                  reloaded.size() == corrections && written.size() == corrections && bytes_kept &&
                  reload_mismatches == 0 && leaks == 0;
  pass = pass && ok;
  return fmt("%s: %zu interactions, %zu users, %zu corrections (recount %zu), %zu mismatches, "
             "%zu leaks, reload %s",
             std::string(to_string(detector.method())).c_str(), report.interactions, report.users,
             report.corrections, corrections, mismatches, leaks,
             bytes_kept && reload_mismatches == 0 ? "bit-equal" : "DIFFERS");
}

Outcome pipeline_privacy() {
  AudioFixture& af = audio();
  PhonemeFixture& pf = phoneme();
  ScratchDir dir("acceptance-store");
  bool pass = true;
  const auto p2p = make_detector(Method::kP2p);
  const double p2p_threshold =
      choose_threshold(pr_curve(scored_pairs(score_split(*p2p, pf.corpus, Split::kCalibration))), 0.5)
          .threshold;
  const double ds_threshold =
      choose_threshold(pr_curve(scored_pairs(score_split(*af.siamese, af.corpus, Split::kCalibration))),
                       kAudioPrecision)
          .threshold;
  std::string detail = audit_simulation(*p2p, pf.corpus, p2p_threshold, dir.path / "p2p.ndjson", pass);
  detail += "; " + audit_simulation(*af.siamese, af.corpus, ds_threshold, dir.path / "ds.ndjson", pass);
  return {pass, detail};
}

int run_cli(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" PRONLEARN_CLI "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  ScratchDir dir("acceptance-determinism");
  const std::vector<std::pair<std::string, std::string>> gen = {
      {"p", "gen-data --seed 11 --locales en-US,fr-FR --entities 60"},
      {"a", "gen-data --seed 11 --mode audio --locales es-MX --entities 30"},
  };
  const std::vector<std::pair<std::string, std::string>> train = {
      {"gbdt", "train --corpus p1 --method gbdt --epochs 2 --seed 5"},
      {"embeddings", "train --corpus p1 --method embeddings --epochs 2 --seed 5"},
      {"dtw-siamese", "train --corpus a1 --method dtw-siamese --epochs 2 --seed 5"},
      {"mel-siamese", "train --corpus a1 --method mel-siamese --epochs 2 --seed 5"},
  };
  std::vector<std::string> differing;
  int failures = 0;
  for (const auto& [name, args] : gen) {
    failures += run_cli(dir.path, args + " --out " + name + "1") != 0;
    failures += run_cli(dir.path, args + " --out " + name + "2") != 0;
    if (tree_contents(dir.path / (name + "1")) != tree_contents(dir.path / (name + "2"))) {
      differing.push_back("gen-data " + name);
    }
  }
  std::size_t files = 0;
  for (const auto& [name, args] : train) {
    failures += run_cli(dir.path, args + " --out " + name + "-1") != 0;
    failures += run_cli(dir.path, args + " --out " + name + "-2") != 0;
    const auto first = tree_contents(dir.path / (name + "-1"));
    files += first.size();
    if (first.empty() || first != tree_contents(dir.path / (name + "-2"))) differing.push_back(name);
  }
  std::string diff;
  for (const auto& d : differing) diff += " " + d;
  return {failures == 0 && differing.empty(),
          fmt("2 corpora and 4 trainers run twice, %zu model files compared; %d command failures; "
              "differing:%s",
              files, failures, diff.empty() ? " none" : diff.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"audio detector ordering", audio_ordering},
      {"phoneme detector ordering", phoneme_ordering},
      {"metric update oracle", metric_oracle},
      {"metric stays positive definite", pd_preservation},
      {"dtw oracle equivalence", dtw_oracle},
      {"bypass reduction", bypass_reduction},
      {"gradient suite", gradient_suite},
      {"metric axioms", metric_axioms},
      {"calibration contract", calibration_contract},
      {"pipeline and privacy", pipeline_privacy},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2zu %-32s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
