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

// Interpretable reference models: binary logistic regression and a CART
// tree with depth picked on validation data.

#ifndef XNNTAB_BASELINES_HPP_
#define XNNTAB_BASELINES_HPP_

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "xnntab/dataset.hpp"
#include "xnntab/tree.hpp"

namespace xnntab {

struct LogRegConfig {
  std::vector<std::size_t> max_iter_grid = {100, 200};
  double lr = 1.0;  // Adam step size, full batch
  double l2 = 0.0;  // 0.5 * l2 * |w|^2, intercept excluded
  double tolerance = 1e-5;  // stop once the gradient norm falls below
  void validate() const;
};

void to_json(nlohmann::json& j, const LogRegConfig& config);
void from_json(const nlohmann::json& j, LogRegConfig& config);

struct LogisticModel {
  DenseMatrix weight;  // 1 x d
  double intercept = 0.0;
  std::size_t iterations = 0;  // iterations actually run
  std::size_t max_iter = 0;    // selected budget
  double gradient_norm = 0.0;  // at the returned parameters
};

struct LogRegLoss {
  double loss = 0.0;
  DenseMatrix weight_grad;
  double intercept_grad = 0.0;
};
// Mean binary cross-entropy (+ optional L2) and its gradient.
LogRegLoss logreg_loss(const LogisticModel& model, const DenseMatrix& x,
                       std::span<const int> labels, double l2);

// Trains once per budget in the grid (deterministic full-batch Adam from
// zero) and keeps the one with the best validation macro-F1.
LogisticModel train_logreg(const TabularDataset& train,
                           const TabularDataset& validation,
                           const LogRegConfig& config = {});
DenseMatrix logreg_scores(const LogisticModel& model, const DenseMatrix& x);
Labels logreg_predict(const LogisticModel& model, const DenseMatrix& x);

struct CartConfig {
  std::vector<std::size_t> depth_grid = {5, 10, 15, 20};
  std::size_t min_samples_split = 2;
  void validate() const;
};

void to_json(nlohmann::json& j, const CartConfig& config);
void from_json(const nlohmann::json& j, CartConfig& config);

struct CartModel {
  DecisionTree tree;
  std::size_t max_depth = 0;
};

CartModel train_cart(const TabularDataset& train,
                     const TabularDataset& validation,
                     const CartConfig& config = {});
Labels cart_predict(const CartModel& model, const DenseMatrix& x);

// JSON artifacts: {"kind", "schema", "schema_hash", ...model fields}.
void save_logreg(const LogisticModel& model, const FeatureSchema& schema,
                 const std::filesystem::path& path);
void save_cart(const CartModel& model, const FeatureSchema& schema,
               const std::filesystem::path& path);
nlohmann::json to_artifact(const LogisticModel& model, const FeatureSchema& schema);
nlohmann::json to_artifact(const CartModel& model, const FeatureSchema& schema);
LogisticModel logreg_from_artifact(const nlohmann::json& j, FeatureSchema* schema);
CartModel cart_from_artifact(const nlohmann::json& j, FeatureSchema* schema);

}  // namespace xnntab

#endif  // XNNTAB_BASELINES_HPP_
