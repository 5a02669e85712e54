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

// Binary CART classifier with Gini impurity. Shared by the rule miner and
// the decision-tree baseline.

#ifndef XNNTAB_TREE_HPP_
#define XNNTAB_TREE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "xnntab/matrix.hpp"
#include "xnntab/ops.hpp"

namespace xnntab {

struct TreeConfig {
  std::size_t max_depth = 4;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left iff x <= threshold
  int left = -1;
  int right = -1;
  std::array<std::size_t, 2> counts{};  // training class counts
  std::size_t depth = 0;
  bool is_leaf() const { return feature < 0; }
  int majority() const { return counts[1] > counts[0] ? 1 : 0; }
};

// Row indices ordered by value for every column (stable on ties).
struct SortedColumns {
  std::vector<std::vector<std::uint32_t>> order;
};
SortedColumns presort(const DenseMatrix& x);

struct PathStep {
  std::size_t feature = 0;
  bool left = true;  // left means x <= threshold
  double threshold = 0.0;
};

struct LeafPath {
  std::vector<PathStep> steps;
  int leaf = 0;
};

class DecisionTree {
 public:
  DecisionTree() = default;

  // Fits on `rows` of `x`. Splits are searched over all features at
  // midpoints between consecutive distinct values; ties keep the first
  // feature and the lowest threshold.
  static DecisionTree fit(const DenseMatrix& x, std::span<const int> labels,
                          std::span<const std::size_t> rows,
                          const TreeConfig& config,
                          const SortedColumns* presorted = nullptr);

  int predict_row(std::span<const double> row) const;
  Labels predict(const DenseMatrix& x) const;
  // Index of the leaf reached by `row`.
  int leaf_of(std::span<const double> row) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t depth() const;
  std::size_t n_leaves() const;
  std::vector<LeafPath> leaf_paths() const;

  friend void to_json(nlohmann::json& j, const DecisionTree& tree);
  friend void from_json(const nlohmann::json& j, DecisionTree& tree);

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

}  // namespace xnntab

#endif  // XNNTAB_TREE_HPP_
