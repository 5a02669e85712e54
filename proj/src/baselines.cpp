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

#include "xnntab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "xnntab/adam.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/kernels.hpp"
#include "xnntab/metrics.hpp"

namespace xnntab {

namespace {

double log1p_exp(double z) {
  // log(1 + e^z) without overflow.
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_dataset(const TabularDataset& ds, const char* what) {
  if (ds.size() == 0) throw ValidationError(std::string(what) + " set is empty");
  if (ds.features.rows() != ds.size())
    throw DimensionError(std::string(what) + " features and labels differ in length");
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

FeatureSchema read_schema(const nlohmann::json& j, const char* kind) {
  if (j.at("kind").get<std::string>() != kind)
    throw SchemaError(std::string("artifact is not a ") + kind + " model");
  FeatureSchema schema = j.at("schema").get<FeatureSchema>();
  if (schema.hash() != j.at("schema_hash").get<std::string>())
    throw SchemaError("baseline schema hash mismatch");
  return schema;
}

}  // namespace

void LogRegConfig::validate() const {
  if (max_iter_grid.empty()) throw ValidationError("max_iter grid is empty");
  for (std::size_t m : max_iter_grid)
    if (m == 0) throw ValidationError("max_iter must be positive");
  if (!(lr > 0.0)) throw ValidationError("logistic regression lr must be > 0");
  if (!(l2 >= 0.0)) throw ValidationError("l2 must be >= 0");
  if (!(tolerance >= 0.0)) throw ValidationError("tolerance must be >= 0");
}

void to_json(nlohmann::json& j, const LogRegConfig& c) {
  j = {{"max_iter_grid", c.max_iter_grid},
       {"lr", c.lr},
       {"l2", c.l2},
       {"tolerance", c.tolerance}};
}

void from_json(const nlohmann::json& j, LogRegConfig& c) {
  c.max_iter_grid = j.value("max_iter_grid", c.max_iter_grid);
  c.lr = j.value("lr", c.lr);
  c.l2 = j.value("l2", c.l2);
  c.tolerance = j.value("tolerance", c.tolerance);
}

LogRegLoss logreg_loss(const LogisticModel& model, const DenseMatrix& x,
                       std::span<const int> labels, double l2) {
  if (x.cols() != model.weight.cols())
    throw DimensionError("logistic regression: input " + x.shape_string() +
                         " vs weights " + model.weight.shape_string());
  if (labels.size() != x.rows())
    throw DimensionError("logistic regression: label count differs from rows");
  const DenseMatrix z = matmul_nt(x, model.weight);
  const double n = static_cast<double>(x.rows());
  LogRegLoss out;
  DenseMatrix residual(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double zi = z(i, 0) + model.intercept;
    // -[y log s + (1-y) log(1-s)] = log(1+e^z) - y z
    out.loss += log1p_exp(zi) - labels[i] * zi;
    residual(i, 0) = (sigmoid(zi) - labels[i]) / n;
    out.intercept_grad += residual(i, 0);
  }
  out.loss /= n;
  out.weight_grad = matmul_tn(residual, x);
  if (l2 > 0.0) {
    for (std::size_t f = 0; f < model.weight.cols(); ++f) {
      out.loss += 0.5 * l2 * model.weight(0, f) * model.weight(0, f);
      out.weight_grad(0, f) += l2 * model.weight(0, f);
    }
  }
  return out;
}

DenseMatrix logreg_scores(const LogisticModel& model, const DenseMatrix& x) {
  DenseMatrix z = matmul_nt(x, model.weight);
  for (double& v : z.values()) v += model.intercept;
  return z;
}

Labels logreg_predict(const LogisticModel& model, const DenseMatrix& x) {
  const DenseMatrix z = logreg_scores(model, x);
  Labels out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) out[i] = z(i, 0) > 0.0 ? 1 : 0;
  return out;
}

LogisticModel train_logreg(const TabularDataset& train,
                           const TabularDataset& validation,
                           const LogRegConfig& config) {
  config.validate();
  check_dataset(train, "training");
  check_dataset(validation, "validation");

  std::vector<std::size_t> budgets = config.max_iter_grid;
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());

  // One run to the largest budget visits every smaller budget's end state,
  // since the optimizer is deterministic and full batch.
  LogisticModel model;
  model.weight = DenseMatrix(1, train.features.cols());
  DenseMatrix intercept(1, 1);
  AdamState w_opt = AdamState::for_param(model.weight, config.lr);
  AdamState b_opt = AdamState::for_param(intercept, config.lr);

  LogisticModel best;
  double best_f1 = -1.0;
  std::size_t next_budget = 0;
  bool converged = false;
  for (std::size_t it = 0; it <= budgets.back(); ++it) {
    model.intercept = intercept(0, 0);
    const LogRegLoss g = logreg_loss(model, train.features, train.labels, config.l2);
    if (!std::isfinite(g.loss))
      throw TrainingError("logistic regression diverged at iteration " +
                          std::to_string(it));
    double norm2 = g.intercept_grad * g.intercept_grad;
    for (double v : g.weight_grad.values()) norm2 += v * v;
    model.gradient_norm = std::sqrt(norm2);
    model.iterations = it;
    converged = converged || model.gradient_norm < config.tolerance;

    while (next_budget < budgets.size() &&
           (it == budgets[next_budget] || converged)) {
      model.max_iter = budgets[next_budget];
      const double f1 = macro_f1(logreg_predict(model, validation.features),
                                 validation.labels);
      if (f1 > best_f1) {
        best_f1 = f1;
        best = model;
      }
      ++next_budget;
    }
    if (next_budget == budgets.size()) break;
    adam_step(model.weight, g.weight_grad, w_opt);
    adam_step(intercept, DenseMatrix(1, 1, g.intercept_grad), b_opt);
  }
  return best;
}

void CartConfig::validate() const {
  if (depth_grid.empty()) throw ValidationError("depth grid is empty");
  for (std::size_t d : depth_grid)
    if (d == 0) throw ValidationError("tree depth must be positive");
  if (min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
}

void to_json(nlohmann::json& j, const CartConfig& c) {
  j = {{"depth_grid", c.depth_grid}, {"min_samples_split", c.min_samples_split}};
}

void from_json(const nlohmann::json& j, CartConfig& c) {
  c.depth_grid = j.value("depth_grid", c.depth_grid);
  c.min_samples_split = j.value("min_samples_split", c.min_samples_split);
}

CartModel train_cart(const TabularDataset& train,
                     const TabularDataset& validation,
                     const CartConfig& config) {
  config.validate();
  check_dataset(train, "training");
  check_dataset(validation, "validation");
  std::vector<std::size_t> rows(train.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const SortedColumns sorted = presort(train.features);
  CartModel best;
  double best_f1 = -1.0;
  for (std::size_t depth : config.depth_grid) {
    TreeConfig tc;
    tc.max_depth = depth;
    tc.min_samples_split = config.min_samples_split;
    CartModel m{DecisionTree::fit(train.features, train.labels, rows, tc, &sorted),
                depth};
    const double f1 = macro_f1(cart_predict(m, validation.features), validation.labels);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = std::move(m);
    }
  }
  return best;
}

Labels cart_predict(const CartModel& model, const DenseMatrix& x) {
  return model.tree.predict(x);
}

nlohmann::json to_artifact(const LogisticModel& model, const FeatureSchema& schema) {
  const auto w = model.weight.row(0);
  return {{"kind", "logreg"},
          {"schema", schema},
          {"schema_hash", schema.hash()},
          {"weight", std::vector<double>(w.begin(), w.end())},
          {"intercept", model.intercept},
          {"iterations", model.iterations},
          {"max_iter", model.max_iter},
          {"gradient_norm", model.gradient_norm}};
}

nlohmann::json to_artifact(const CartModel& model, const FeatureSchema& schema) {
  return {{"kind", "cart"},
          {"schema", schema},
          {"schema_hash", schema.hash()},
          {"max_depth", model.max_depth},
          {"tree", model.tree}};
}

void save_logreg(const LogisticModel& model, const FeatureSchema& schema,
                 const std::filesystem::path& path) {
  write_json(to_artifact(model, schema), path);
}

void save_cart(const CartModel& model, const FeatureSchema& schema,
               const std::filesystem::path& path) {
  write_json(to_artifact(model, schema), path);
}

LogisticModel logreg_from_artifact(const nlohmann::json& j, FeatureSchema* schema) {
  const FeatureSchema s = read_schema(j, "logreg");
  const auto w = j.at("weight").get<std::vector<double>>();
  if (w.size() != s.n_features())
    throw SchemaError("logistic weights do not match the schema");
  LogisticModel m;
  m.weight = DenseMatrix(1, w.size(), w);
  m.intercept = j.at("intercept").get<double>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.max_iter = j.at("max_iter").get<std::size_t>();
  m.gradient_norm = j.at("gradient_norm").get<double>();
  if (schema) *schema = s;
  return m;
}

CartModel cart_from_artifact(const nlohmann::json& j, FeatureSchema* schema) {
  const FeatureSchema s = read_schema(j, "cart");
  CartModel m;
  m.max_depth = j.at("max_depth").get<std::size_t>();
  m.tree = j.at("tree").get<DecisionTree>();
  if (m.tree.n_features() != s.n_features())
    throw SchemaError("tree does not match the schema");
  if (schema) *schema = s;
  return m;
}

}  // namespace xnntab
