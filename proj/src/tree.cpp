/*
 * Copyright 2026 The XNNTab Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "xnntab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "xnntab/errors.hpp"

namespace xnntab {

namespace {

struct Sweep {
  std::array<std::size_t, 2> left{};
  std::size_t n_left = 0;
  double prev = 0.0;
  bool has_prev = false;
};

struct BestSplit {
  double score = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

double split_proxy(const std::array<std::size_t, 2>& left, std::size_t n_left,
                   const std::array<std::size_t, 2>& total, std::size_t n) {
  // Maximizing sum_k n_k^2 / n over both children minimizes the weighted
  // Gini impurity.
  const double l0 = static_cast<double>(left[0]);
  const double l1 = static_cast<double>(left[1]);
  const double r0 = static_cast<double>(total[0] - left[0]);
  const double r1 = static_cast<double>(total[1] - left[1]);
  return (l0 * l0 + l1 * l1) / static_cast<double>(n_left) +
         (r0 * r0 + r1 * r1) / static_cast<double>(n - n_left);
}

double midpoint(double a, double b) {
  double t = a / 2.0 + b / 2.0;
  if (t >= b || !std::isfinite(t)) t = a;
  return t;
}

}  // namespace

void TreeConfig::validate() const {
  if (max_depth < 1) throw ValidationError("tree max_depth must be >= 1");
  if (min_samples_split < 2)
    throw ValidationError("tree min_samples_split must be >= 2");
  if (min_samples_leaf < 1)
    throw ValidationError("tree min_samples_leaf must be >= 1");
}

SortedColumns presort(const DenseMatrix& x) {
  if (x.rows() > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("presort: too many rows");
  SortedColumns s;
  s.order.resize(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& order = s.order[f];
    order.resize(x.rows());
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return x(a, f) < x(b, f);
                     });
  }
  return s;
}

DecisionTree DecisionTree::fit(const DenseMatrix& x,
                               std::span<const int> labels,
                               std::span<const std::size_t> rows,
                               const TreeConfig& config,
                               const SortedColumns* presorted) {
  config.validate();
  if (labels.size() != x.rows()) {
    throw DimensionError("tree fit: " + std::to_string(labels.size()) +
                         " labels for " + x.shape_string() + " features");
  }
  if (rows.empty()) throw ValidationError("tree fit: no rows");
  if (!x.all_finite()) throw ValidationError("tree fit: non-finite features");

  SortedColumns local;
  if (presorted == nullptr) {
    local = presort(x);
    presorted = &local;
  } else if (presorted->order.size() != x.cols()) {
    throw DimensionError("tree fit: presorted columns do not match features");
  }

  DecisionTree tree;
  tree.n_features_ = x.cols();
  std::vector<int> assign(x.rows(), -1);
  TreeNode root;
  for (std::size_t r : rows) {
    if (r >= x.rows()) throw ValidationError("tree fit: row index out of range");
    if (assign[r] != -1) throw ValidationError("tree fit: duplicate row index");
    if (labels[r] != 0 && labels[r] != 1)
      throw ValidationError("tree fit: labels must be 0 or 1");
    assign[r] = 0;
    ++root.counts[labels[r]];
  }
  tree.nodes_.push_back(root);

  auto splittable = [&](const TreeNode& node) {
    const std::size_t n = node.counts[0] + node.counts[1];
    return node.depth < config.max_depth && n >= config.min_samples_split &&
           node.counts[0] > 0 && node.counts[1] > 0;
  };

  std::vector<int> frontier;
  if (splittable(tree.nodes_[0])) frontier.push_back(0);
  std::vector<int> slot_of(1, -1);

  while (!frontier.empty()) {
    slot_of.assign(tree.nodes_.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[frontier[s]] = static_cast<int>(s);
    std::vector<BestSplit> best(frontier.size());
    std::vector<Sweep> sweeps(frontier.size());

    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::fill(sweeps.begin(), sweeps.end(), Sweep{});
      for (std::uint32_t r : presorted->order[f]) {
        const int node = assign[r];
        if (node < 0) continue;
        const int s = slot_of[node];
        if (s < 0) continue;
        Sweep& sw = sweeps[s];
        const double v = x(r, f);
        if (sw.has_prev && v > sw.prev) {
          const TreeNode& nd = tree.nodes_[node];
          const std::size_t n = nd.counts[0] + nd.counts[1];
          if (sw.n_left >= config.min_samples_leaf &&
              n - sw.n_left >= config.min_samples_leaf) {
            const double score = split_proxy(sw.left, sw.n_left, nd.counts, n);
            if (score > best[s].score) {
              best[s].score = score;
              best[s].feature = static_cast<int>(f);
              best[s].threshold = midpoint(sw.prev, v);
            }
          }
        }
        ++sw.left[labels[r]];
        ++sw.n_left;
        sw.prev = v;
        sw.has_prev = true;
      }
    }

    std::vector<int> next;
    std::vector<int> split_slot(tree.nodes_.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      if (best[s].feature < 0) continue;
      const int id = frontier[s];
      TreeNode child;
      child.depth = tree.nodes_[id].depth + 1;
      const int left = static_cast<int>(tree.nodes_.size());
      tree.nodes_.push_back(child);
      tree.nodes_.push_back(child);
      TreeNode& node = tree.nodes_[id];
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.left = left;
      node.right = left + 1;
      split_slot[id] = static_cast<int>(s);
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const int node = assign[r];
      if (node < 0 || node >= static_cast<int>(split_slot.size()) ||
          split_slot[node] < 0)
        continue;
      const TreeNode& nd = tree.nodes_[node];
      const int child = x(r, static_cast<std::size_t>(nd.feature)) <= nd.threshold
                            ? nd.left
                            : nd.right;
      assign[r] = child;
      ++tree.nodes_[child].counts[labels[r]];
    }
    for (int id : frontier) {
      const TreeNode& nd = tree.nodes_[id];
      if (nd.is_leaf()) continue;
      for (int child : {nd.left, nd.right})
        if (splittable(tree.nodes_[child])) next.push_back(child);
    }
    frontier = std::move(next);
  }
  return tree;
}

int DecisionTree::leaf_of(std::span<const double> row) const {
  if (nodes_.empty()) throw StateError("decision tree is not fitted");
  if (row.size() != n_features_) {
    throw DimensionError("tree predict: expected " +
                         std::to_string(n_features_) + " features, got " +
                         std::to_string(row.size()));
  }
  int id = 0;
  while (!nodes_[id].is_leaf()) {
    const TreeNode& nd = nodes_[id];
    id = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                   : nd.right;
  }
  return id;
}

int DecisionTree::predict_row(std::span<const double> row) const {
  return nodes_[leaf_of(row)].majority();
}

Labels DecisionTree::predict(const DenseMatrix& x) const {
  Labels out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(x.row(r));
  return out;
}

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t DecisionTree::n_leaves() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<LeafPath> DecisionTree::leaf_paths() const {
  std::vector<LeafPath> out;
  if (nodes_.empty()) return out;
  std::vector<PathStep> path;
  auto walk = [&](auto&& self, int id) -> void {
    const TreeNode& nd = nodes_[id];
    if (nd.is_leaf()) {
      out.push_back({path, id});
      return;
    }
    const auto f = static_cast<std::size_t>(nd.feature);
    path.push_back({f, true, nd.threshold});
    self(self, nd.left);
    path.back().left = false;
    self(self, nd.right);
    path.pop_back();
  };
  walk(walk, 0);
  return out;
}

void to_json(nlohmann::json& j, const DecisionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes_) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts[0],
                     n.counts[1], n.depth});
  }
  j = {{"n_features", tree.n_features_}, {"nodes", std::move(nodes)}};
}

void from_json(const nlohmann::json& j, DecisionTree& tree) {
  tree.n_features_ = j.at("n_features").get<std::size_t>();
  tree.nodes_.clear();
  for (const auto& a : j.at("nodes")) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.counts = {a.at(4).get<std::size_t>(), a.at(5).get<std::size_t>()};
    n.depth = a.at(6).get<std::size_t>();
    tree.nodes_.push_back(n);
  }
  const auto size = static_cast<int>(tree.nodes_.size());
  for (const auto& n : tree.nodes_) {
    if (n.is_leaf()) continue;
    if (n.feature >= static_cast<int>(tree.n_features_) || n.left <= 0 ||
        n.right <= 0 || n.left >= size || n.right >= size)
      throw SchemaError("decision tree json has dangling nodes");
  }
}

}  // namespace xnntab
