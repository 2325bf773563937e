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


// pronlearn command-line tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pronlearn/calibration.hpp"
#include "pronlearn/correction.hpp"
#include "pronlearn/datagen.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/methods.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace pronlearn;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kIo = 3, kNumeric = 4, kInfeasible = 5 };

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << "\n";
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

struct GenArgs {
  fs::path out;
  std::string mode = "phoneme";
  std::string preset = "standard";
  std::vector<std::string> locales;
  std::size_t entities = 0;
  double mispronunciation_rate = 0.0;
  double homograph_rate = 0.0;
  double non_native_rate = 0.0;
  std::size_t variants = 0;
  std::uint64_t seed = 7;
};

int cmd_gen_data(const GenArgs& a, const CLI::App& sub) {
  DatasetSpec spec;
  if (a.preset == "homograph-heavy") {
    spec = homograph_heavy_spec();
  } else if (a.preset != "standard") {
    throw InvalidArgument("unknown preset '" + a.preset + "'");
  } else {
    spec = parse_corpus_mode(a.mode) == CorpusMode::kAudio ? DatasetSpec::audio_defaults()
                                                            : DatasetSpec::phoneme_defaults();
  }
  if (sub.count("--locales")) spec.locales = a.locales;
  if (sub.count("--entities")) spec.entities_per_locale = a.entities;
  if (sub.count("--mispronunciation-rate")) spec.mispronunciation_rate = a.mispronunciation_rate;
  if (sub.count("--homograph-rate")) spec.homograph_rate = a.homograph_rate;
  if (sub.count("--non-native-rate")) spec.non_native_rate = a.non_native_rate;
  if (sub.count("--variants")) spec.variants = a.variants;
  spec.seed = a.seed;
  spec.validate();

  const Corpus corpus = generate_corpus(spec);
  save_corpus(corpus, a.out);

  std::size_t labels = 0, homographs = 0, non_native = 0;
  std::map<std::string, std::size_t> splits;
  for (const auto& e : corpus.examples) {
    labels += e.label;
    homographs += e.homograph;
    non_native += e.non_native;
    ++splits[std::string(to_string(e.split))];
  }
  const double n = static_cast<double>(corpus.examples.size());
  const Json summary{{"examples", corpus.examples.size()},
                     {"locales", spec.locales.size()},
                     {"mode", to_string(spec.mode)},
                     {"variants", corpus.variants()},
                     {"label_rate", labels / n},
                     {"spec_label_rate", spec.mispronunciation_rate},
                     {"homograph_rate", homographs / n},
                     {"non_native_rate", non_native / n},
                     {"splits", splits}};
  write_json(a.out / "summary.json", summary);
  std::printf("%-16s %zu (%zu locales, %s)\n", "examples", corpus.examples.size(),
              spec.locales.size(), std::string(to_string(spec.mode)).c_str());
  std::printf("%-16s %.4f (spec %.4f)\n", "label rate", labels / n, spec.mispronunciation_rate);
  std::printf("%-16s %.4f\n", "homograph rate", homographs / n);
  std::printf("%-16s %.4f\n", "non-native rate", non_native / n);
  for (const auto& [name, count] : splits) std::printf("%-16s %zu\n", name.c_str(), count);
  return kOk;
}

struct TrainArgs {
  fs::path corpus;
  fs::path out;
  std::string method;
  std::uint64_t seed = 7;
  std::size_t epochs = 0;
};

int cmd_train(const TrainArgs& a) {
  const Method method = parse_method(a.method);
  if (!is_trainable(method)) throw InvalidArgument("method " + a.method + " has nothing to train");
  const Corpus corpus = load_corpus(a.corpus);
  TrainOptions options;
  options.seed = a.seed;
  options.epochs = a.epochs;
  const TrainSummary summary = train_method(method, corpus, a.out, options);
  std::printf("%-24s %8s %14s %14s\n", "stage", "steps", "initial loss", "final loss");
  for (const auto& s : summary.stages) {
    std::printf("%-24s %8zu %14.6f %14.6f\n", s.name.c_str(), s.loss.size(),
                s.loss.empty() ? 0.0 : s.loss.front(), s.loss.empty() ? 0.0 : s.loss.back());
  }
  if (method == Method::kDtwSiamese) std::printf("metric updates %zu\n", summary.metric_updates);
  std::printf("model written to %s\n", a.out.string().c_str());
  return kOk;
}

struct CalibrateArgs {
  fs::path corpus;
  fs::path model;
  fs::path out;
  std::string method;
  double target = 0.95;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const Method method = parse_method(a.method);
  if (is_trainable(method) && a.model.empty()) {
    throw InvalidArgument("--model is required for method " + a.method);
  }
  const Corpus corpus = load_corpus(a.corpus);
  const auto detector = make_detector(method, a.model);
  const auto items = score_split(*detector, corpus, Split::kCalibration);
  const auto pairs = scored_pairs(items);
  ThresholdRecord record;
  record.method = method;
  record.model_dir = a.model;
  record.split = std::string(to_string(Split::kCalibration));
  record.target_precision = a.target;
  record.point = choose_threshold(pr_curve(pairs), a.target);
  write_json(a.out, to_json(record));
  std::printf("%-12s %s\n%-12s %.6g\n%-12s %.4f (target %.4f)\n%-12s %.4f\n%-12s %zu\n",
              "method", a.method.c_str(), "threshold", record.point.threshold, "precision",
              record.point.precision, a.target, "recall", record.point.recall, "items",
              pairs.size());
  return kOk;
}

struct EvaluateArgs {
  fs::path corpus;
  fs::path out;
  std::vector<std::string> methods;
  std::vector<fs::path> threshold_files;
  std::string split = "eval";
};

int cmd_evaluate(const EvaluateArgs& a) {
  std::map<Method, ThresholdRecord> records;
  for (const auto& path : a.threshold_files) {
    ThresholdRecord r = load_threshold_record(path);
    records[r.method] = std::move(r);
  }
  std::vector<Method> methods;
  for (const auto& m : a.methods) methods.push_back(parse_method(m));
  if (methods.empty()) {
    for (const auto& [m, r] : records) methods.push_back(m);
  }
  if (methods.empty()) throw InvalidArgument("give --method or --threshold-file");
  for (Method m : methods) {
    if (!is_detector(m)) throw InvalidArgument(std::string(to_string(m)) + " is not a detector");
    if (!records.count(m) && m != Method::kOracle) {
      throw InvalidArgument("no --threshold-file for method " + std::string(to_string(m)));
    }
  }

  const Split split = parse_split(a.split);
  const Corpus corpus = load_corpus(a.corpus);
  EvalReport report;
  report.split = a.split;
  for (Method m : methods) {
    const auto it = records.find(m);
    // The oracle scores 0 or 1, so any threshold in between separates it.
    const double threshold = it != records.end() ? it->second.point.threshold : 0.5;
    const auto detector = make_detector(m, it != records.end() ? it->second.model_dir : fs::path{});
    const auto items = score_split(*detector, corpus, split);
    report.methods[std::string(to_string(m))] = evaluate_method(corpus, items, threshold);
  }
  write_json(a.out, to_json(report));
  std::cout << format_table(report);
  return kOk;
}

struct SimulateArgs {
  fs::path corpus;
  fs::path out;
  fs::path threshold_file;
  std::string method;
  double policy_min_seconds = 10.0;
  std::string split = "eval";
};

int cmd_simulate(const SimulateArgs& a) {
  CorrectionPolicy policy;
  policy.min_duration_seconds = a.policy_min_seconds;
  policy.validate();
  ThresholdRecord record;
  if (!a.threshold_file.empty()) {
    record = load_threshold_record(a.threshold_file);
    if (!a.method.empty() && parse_method(a.method) != record.method) {
      throw InvalidArgument("--method disagrees with the threshold file");
    }
  } else if (!a.method.empty() && parse_method(a.method) == Method::kOracle) {
    record.method = Method::kOracle;
    record.point.threshold = 0.5;
  } else {
    throw InvalidArgument("--threshold-file is required");
  }
  const Split split = parse_split(a.split);
  const Corpus corpus = load_corpus(a.corpus);
  const auto detector = make_detector(record.method, record.model_dir);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError(a.out.string() + ": " + ec.message());
  const fs::path store_path = a.out / "store.ndjson";
  fs::remove(store_path, ec);
  if (ec) throw IoError(store_path.string() + ": " + ec.message());

  SimulationReport report;
  {
    PronunciationStore store = PronunciationStore::open(store_path);
    report = simulate_corrections(*detector, corpus, split, record.point.threshold, policy, store);
  }
  const std::size_t reloaded = PronunciationStore::open(store_path).size();
  Json j = to_json(report);
  j["policy_min_seconds"] = a.policy_min_seconds;
  j["store_records"] = reloaded;
  write_json(a.out / "simulation.json", j);
  std::cout << format_summary(report);
  std::printf("%-13s %zu\n", "reloaded", reloaded);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pronlearn: pronunciation mispronunciation detection and correction"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic labeled corpus");
  gen_cmd->add_option("--out", gen.out, "Output corpus directory")->required();
  gen_cmd->add_option("--mode", gen.mode, "phoneme or audio");
  gen_cmd->add_option("--preset", gen.preset, "standard or homograph-heavy");
  gen_cmd->add_option("--locales", gen.locales, "Locale names")->delimiter(',');
  gen_cmd->add_option("--entities", gen.entities, "Entities per locale");
  gen_cmd->add_option("--mispronunciation-rate", gen.mispronunciation_rate);
  gen_cmd->add_option("--homograph-rate", gen.homograph_rate);
  gen_cmd->add_option("--non-native-rate", gen.non_native_rate);
  gen_cmd->add_option("--variants", gen.variants, "Recordings per entity (audio)");
  gen_cmd->add_option("--seed", gen.seed);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on the train split");
  train_cmd->add_option("--corpus", train.corpus)->required();
  train_cmd->add_option("--method", train.method, "gbdt, mel-siamese, dtw-siamese or embeddings")
      ->required();
  train_cmd->add_option("--out", train.out, "Model directory")->required();
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--epochs", train.epochs, "0 keeps the method default");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Pick a threshold on the calibration split");
  cal_cmd->add_option("--corpus", cal.corpus)->required();
  cal_cmd->add_option("--method", cal.method)->required();
  cal_cmd->add_option("--model", cal.model, "Model directory for trained methods");
  cal_cmd->add_option("--out", cal.out, "Threshold JSON file")->required();
  cal_cmd->add_option("--target-precision", cal.target);

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Report precision, recall and accuracy");
  eval_cmd->add_option("--corpus", eval.corpus)->required();
  eval_cmd->add_option("--method", eval.methods);
  eval_cmd->add_option("--threshold-file", eval.threshold_files);
  eval_cmd->add_option("--split", eval.split);
  eval_cmd->add_option("--out", eval.out, "Report JSON file")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate-correction", "Run the correction pipeline");
  sim_cmd->add_option("--corpus", sim.corpus)->required();
  sim_cmd->add_option("--threshold-file", sim.threshold_file);
  sim_cmd->add_option("--method", sim.method);
  sim_cmd->add_option("--split", sim.split);
  sim_cmd->add_option("--policy-min-seconds", sim.policy_min_seconds);
  sim_cmd->add_option("--out", sim.out, "Output directory for the store and report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, *gen_cmd);
    if (*train_cmd) return cmd_train(train);
    if (*cal_cmd) return cmd_calibrate(cal);
    if (*eval_cmd) return cmd_evaluate(eval);
    if (*sim_cmd) return cmd_simulate(sim);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const CalibrationInfeasible& e) {
    std::cerr << "calibration infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
