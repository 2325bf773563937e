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

#include "pronlearn/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "io_util.hpp"
#include "pronlearn/errors.hpp"

namespace pronlearn {

namespace {

constexpr const char* kMagic = "pronlearn-gbdt";
constexpr int kFormatVersion = 1;
constexpr double kMinGain = 1e-12;
constexpr int kMaxHalvings = 30;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^m) - y m, the logistic loss of margin m.
double logistic_loss(double m, bool y) {
  const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  return softplus - (y ? m : 0.0);
}

double mean_loss(std::span<const double> margins, std::span<const bool> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) total += logistic_loss(margins[i], labels[i]);
  return total / static_cast<double>(margins.size());
}

// Split point between two consecutive distinct values a < b such that
// a <= t < b holds in floating point.
double split_point(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

struct Column {
  std::vector<std::size_t> order;  // example indices by ascending value
  std::vector<double> values;      // values in that order
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Column>& columns, const std::vector<double>& column_major,
              std::size_t n, double lambda)
      : columns_(columns), x_(column_major), n_(n), lambda_(lambda) {}

  RegressionTree grow(std::span<const double> grad, std::span<const double> hess,
                      std::size_t depth) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n_, 0);
    std::vector<int> frontier = {0};
    std::vector<double> g_sum = {std::accumulate(grad.begin(), grad.end(), 0.0)};
    std::vector<double> h_sum = {std::accumulate(hess.begin(), hess.end(), 0.0)};

    for (std::size_t level = 0; level < depth && !frontier.empty(); ++level) {
      const std::size_t m = frontier.size();
      std::vector<int> slot(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < m; ++s) slot[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

      std::vector<double> best_gain(m, kMinGain), best_threshold(m, 0.0);
      std::vector<int> best_feature(m, -1);
      std::vector<double> gl(m), hl(m), last(m);
      std::vector<char> seen(m);
      for (std::size_t f = 0; f < columns_.size(); ++f) {
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(hl.begin(), hl.end(), 0.0);
        std::fill(seen.begin(), seen.end(), 0);
        const Column& col = columns_[f];
        for (std::size_t k = 0; k < n_; ++k) {
          const std::size_t i = col.order[k];
          const int s = slot[static_cast<std::size_t>(node_of[i])];
          if (s < 0) continue;
          const double x = col.values[k];
          if (seen[s] && x > last[s]) {
            const double g = g_sum[s], h = h_sum[s];
            const double gr = g - gl[s], hr = h - hl[s];
            const double gain = gl[s] * gl[s] / (hl[s] + lambda_) + gr * gr / (hr + lambda_) -
                                g * g / (h + lambda_);
            if (gain > best_gain[s]) {
              best_gain[s] = gain;
              best_feature[s] = static_cast<int>(f);
              best_threshold[s] = split_point(last[s], x);
            }
          }
          gl[s] += grad[i];
          hl[s] += hess[i];
          last[s] = x;
          seen[s] = 1;
        }
      }

      std::vector<int> next;
      std::vector<double> next_g, next_h;
      std::vector<int> left_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < m; ++s) {
        const int id = frontier[s];
        if (best_feature[s] < 0) {
          set_leaf(tree.nodes[static_cast<std::size_t>(id)], g_sum[s], h_sum[s]);
          continue;
        }
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature[s];
        node.threshold = best_threshold[s];
        node.left = left;
        node.right = left + 1;
        left_of[static_cast<std::size_t>(id)] = left;
        next.push_back(left);
        next.push_back(left + 1);
        next_g.insert(next_g.end(), {0.0, 0.0});
        next_h.insert(next_h.end(), {0.0, 0.0});
      }
      if (next.empty()) {
        frontier.clear();
        break;
      }
      std::vector<int> child_slot(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < next.size(); ++s) child_slot[static_cast<std::size_t>(next[s])] = static_cast<int>(s);
      for (std::size_t i = 0; i < n_; ++i) {
        const int id = node_of[i];
        if (static_cast<std::size_t>(id) >= left_of.size() || left_of[static_cast<std::size_t>(id)] < 0) continue;
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        const double x = x_[static_cast<std::size_t>(node.feature) * n_ + i];
        node_of[i] = x <= node.threshold ? node.left : node.right;
        const auto cs = static_cast<std::size_t>(child_slot[static_cast<std::size_t>(node_of[i])]);
        next_g[cs] += grad[i];
        next_h[cs] += hess[i];
      }
      frontier = std::move(next);
      g_sum = std::move(next_g);
      h_sum = std::move(next_h);
    }
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      set_leaf(tree.nodes[static_cast<std::size_t>(frontier[s])], g_sum[s], h_sum[s]);
    }
    return tree;
  }

 private:
  void set_leaf(TreeNode& node, double g, double h) const {
    node.feature = -1;
    node.left = node.right = -1;
    node.value = -g / (h + lambda_);
  }

  const std::vector<Column>& columns_;
  const std::vector<double>& x_;
  std::size_t n_;
  double lambda_;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void validate_tree(const RegressionTree& tree, std::size_t n_features) {
  if (tree.nodes.empty()) throw InvalidArgument("tree has no nodes");
  const auto n = static_cast<int>(tree.nodes.size());
  std::vector<int> parents(tree.nodes.size(), 0);
  for (const TreeNode& node : tree.nodes) {
    if (node.leaf()) {
      if (!std::isfinite(node.value)) throw InvalidArgument("non-finite leaf value");
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= n_features) {
      throw InvalidArgument("split feature out of range");
    }
    if (!std::isfinite(node.threshold)) throw InvalidArgument("non-finite threshold");
    for (int child : {node.left, node.right}) {
      if (child <= 0 || child >= n) throw InvalidArgument("child index out of range");
      ++parents[static_cast<std::size_t>(child)];
    }
  }
  for (std::size_t i = 1; i < parents.size(); ++i) {
    if (parents[i] != 1) throw InvalidArgument("tree nodes do not form a tree");
  }
}

}  // namespace

PairFeatures build_features(const Eigen::MatrixXd& user, const Eigen::MatrixXd& tts,
                            std::size_t segments) {
  if (segments == 0) throw InvalidArgument("build_features: segments must be >= 1");
  if (user.cols() != tts.cols()) {
    throw InvalidArgument("build_features: embedding widths differ (" +
                          std::to_string(user.cols()) + " vs " + std::to_string(tts.cols()) + ")");
  }
  const auto e = static_cast<std::size_t>(user.cols());
  PairFeatures out(2 * segments * e, 0.0);
  const auto pool = [&](const Eigen::MatrixXd& m, std::size_t offset) {
    const auto rows = static_cast<std::size_t>(m.rows());
    const std::size_t padded = std::max(rows, segments);
    for (std::size_t k = 0; k < segments; ++k) {
      const std::size_t begin = k * padded / segments;
      const std::size_t end = (k + 1) * padded / segments;
      double* dst = out.data() + offset + k * e;
      for (std::size_t r = begin; r < std::min(end, rows); ++r) {
        for (std::size_t c = 0; c < e; ++c) {
          dst[c] += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
      }
      const double width = static_cast<double>(end - begin);
      for (std::size_t c = 0; c < e; ++c) dst[c] /= width;
    }
  };
  pool(user, 0);
  pool(tts, segments * e);
  return out;
}

void GbdtParams::validate() const {
  if (depth == 0) throw InvalidArgument("gbdt: depth must be >= 1");
  if (!(shrinkage >= 0.0) || !std::isfinite(shrinkage)) {
    throw InvalidArgument("gbdt: shrinkage must be finite and >= 0");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("gbdt: lambda must be finite and >= 0");
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes[i].value;
}

double GbdtModel::margin(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw InvalidArgument("gbdt: expected " + std::to_string(n_features) + " features, got " +
                          std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return base_score + shrinkage * sum;
}

double predict(const GbdtModel& model, std::span<const double> features) {
  return sigmoid(model.margin(features));
}

GbdtModel train_gbdt(std::span<const PairFeatures> features, std::span<const bool> labels,
                     const GbdtParams& params, GbdtTrainResult* result) {
  params.validate();
  const std::size_t n = features.size();
  if (n == 0) throw InvalidArgument("train_gbdt: empty training set");
  if (labels.size() != n) throw InvalidArgument("train_gbdt: one label per example required");
  if (n < 2) throw InvalidArgument("train_gbdt: need at least two examples");
  const std::size_t f = features[0].size();
  if (f == 0) throw InvalidArgument("train_gbdt: empty feature vectors");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (features[i].size() != f) throw InvalidArgument("train_gbdt: feature lengths differ");
    for (double v : features[i]) {
      if (!std::isfinite(v)) throw InvalidArgument("train_gbdt: non-finite feature");
    }
    positives += labels[i];
  }
  if (positives == 0 || positives == n) {
    throw InvalidArgument("train_gbdt: both classes must be present");
  }

  std::vector<double> column_major(f * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) column_major[j * n + i] = features[i][j];
  }
  std::vector<Column> columns(f);
  for (std::size_t j = 0; j < f; ++j) {
    Column& col = columns[j];
    col.order.resize(n);
    std::iota(col.order.begin(), col.order.end(), 0);
    const double* x = column_major.data() + j * n;
    std::stable_sort(col.order.begin(), col.order.end(),
                     [x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    col.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) col.values[k] = x[col.order[k]];
  }

  GbdtModel model;
  model.n_features = f;
  model.shrinkage = params.shrinkage;
  const double prior = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = std::log(prior / (1.0 - prior));

  std::vector<double> margins(n, model.base_score), trial(n), grad(n), hess(n);
  GbdtTrainResult r;
  r.log_loss.push_back(mean_loss(margins, labels));
  TreeBuilder builder(columns, column_major, n, params.lambda);
  for (std::size_t t = 0; t < params.trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margins[i]);
      grad[i] = p - (labels[i] ? 1.0 : 0.0);
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    RegressionTree tree = builder.grow(grad, hess, params.depth);
    std::vector<double> step(n);
    for (std::size_t i = 0; i < n; ++i) step[i] = model.shrinkage * tree.predict(features[i]);
    double scale = 1.0;
    bool accepted = false;
    double loss = 0.0;
    for (int k = 0; k <= kMaxHalvings; ++k, scale *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = margins[i] + scale * step[i];
      loss = mean_loss(trial, labels);
      if (loss <= r.log_loss.back()) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (scale != 1.0) {
      for (auto& node : tree.nodes) node.value *= scale;
    }
    margins.swap(trial);
    r.log_loss.push_back(loss);
    model.trees.push_back(std::move(tree));
  }
  if (result != nullptr) *result = std::move(r);
  return model;
}

std::string serialize_gbdt(const GbdtModel& model) {
  std::string out = std::string(kMagic) + " " + std::to_string(kFormatVersion) + "\n";
  out += "features " + std::to_string(model.n_features) + "\n";
  out += "base_score " + format_double(model.base_score) + "\n";
  out += "shrinkage " + format_double(model.shrinkage) + "\n";
  out += "trees " + std::to_string(model.trees.size()) + "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& nodes = model.trees[t].nodes;
    out += "tree " + std::to_string(t) + " " + std::to_string(nodes.size()) + "\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const TreeNode& n = nodes[i];
      if (n.leaf()) {
        out += "leaf " + std::to_string(i) + " " + format_double(n.value) + "\n";
      } else {
        out += "split " + std::to_string(i) + " " + std::to_string(n.feature) + " " +
               format_double(n.threshold) + " " + std::to_string(n.left) + " " +
               std::to_string(n.right) + "\n";
      }
    }
  }
  return out;
}

GbdtModel parse_gbdt(std::string_view text) {
  const auto lines = detail::split_lines(text);
  std::size_t at = 0;
  const auto next_fields = [&](std::string_view expect, std::size_t count) {
    if (at >= lines.size()) throw IoError("gbdt model: unexpected end of file");
    auto fields = detail::split_whitespace(lines[at++]);
    if (fields.size() != count || fields[0] != expect) {
      throw IoError("gbdt model line " + std::to_string(at) + ": expected '" + std::string(expect) +
                    "' with " + std::to_string(count - 1) + " values");
    }
    return fields;
  };
  const auto to_size = [&](std::string_view s) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(std::string(s), &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw IoError("gbdt model line " + std::to_string(at) + ": bad integer '" + std::string(s) + "'");
    }
  };
  const auto to_double = [&](std::string_view s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(std::string(s), &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw IoError("gbdt model line " + std::to_string(at) + ": bad number '" + std::string(s) + "'");
    }
  };

  const auto header = next_fields(kMagic, 2);
  if (to_size(header[1]) != static_cast<std::size_t>(kFormatVersion)) {
    throw IoError("gbdt model: unsupported version");
  }
  GbdtModel model;
  model.n_features = to_size(next_fields("features", 2)[1]);
  model.base_score = to_double(next_fields("base_score", 2)[1]);
  model.shrinkage = to_double(next_fields("shrinkage", 2)[1]);
  const std::size_t trees = to_size(next_fields("trees", 2)[1]);
  for (std::size_t t = 0; t < trees; ++t) {
    const auto head = next_fields("tree", 3);
    if (to_size(head[1]) != t) throw IoError("gbdt model: trees out of order");
    RegressionTree tree;
    tree.nodes.resize(to_size(head[2]));
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (at >= lines.size()) throw IoError("gbdt model: unexpected end of file");
      const auto kind = detail::split_whitespace(lines[at]);
      TreeNode& node = tree.nodes[i];
      if (!kind.empty() && kind[0] == "leaf") {
        const auto f = next_fields("leaf", 3);
        if (to_size(f[1]) != i) throw IoError("gbdt model: nodes out of order");
        node.value = to_double(f[2]);
      } else {
        const auto f = next_fields("split", 6);
        if (to_size(f[1]) != i) throw IoError("gbdt model: nodes out of order");
        node.feature = static_cast<int>(to_size(f[2]));
        node.threshold = to_double(f[3]);
        node.left = static_cast<int>(to_size(f[4]));
        node.right = static_cast<int>(to_size(f[5]));
      }
    }
    try {
      validate_tree(tree, model.n_features);
    } catch (const InvalidArgument& e) {
      throw IoError(std::string("gbdt model: ") + e.what());
    }
    model.trees.push_back(std::move(tree));
  }
  for (; at < lines.size(); ++at) {
    if (!detail::trim(lines[at]).empty()) throw IoError("gbdt model: trailing content");
  }
  if (!std::isfinite(model.base_score) || !std::isfinite(model.shrinkage)) {
    throw IoError("gbdt model: non-finite header value");
  }
  return model;
}

void save_gbdt(const std::filesystem::path& path, const GbdtModel& model) {
  detail::write_file(path, serialize_gbdt(model));
}

GbdtModel load_gbdt(const std::filesystem::path& path) {
  return parse_gbdt(detail::read_file(path));
}

}  // namespace pronlearn
