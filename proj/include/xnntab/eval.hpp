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

// 5-fold cross-validated evaluation and Table-1 style reports.

#ifndef XNNTAB_EVAL_HPP_
#define XNNTAB_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xnntab/baselines.hpp"
#include "xnntab/dataset.hpp"
#include "xnntab/folds.hpp"
#include "xnntab/model.hpp"

namespace xnntab {

enum class ModelKind { kXnnTab, kMlp, kLogReg, kCart };

std::string model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct EvalConfig {
  XnnTabConfig xnntab;  // also supplies the MLP baseline's settings
  LogRegConfig logreg;
  CartConfig cart;
  bool parallel_folds = true;

  static EvalConfig for_dataset(const std::string& name);
  // Settings that affect results for `kind`, as canonical JSON.
  nlohmann::json relevant(ModelKind kind) const;
};

struct FoldMetrics {
  std::size_t fold = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  std::size_t n_test = 0;
};

// Population std (divide by the number of folds).
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};
Summary summarize(const std::vector<double>& values);

struct MetricReport {
  std::string dataset;
  std::string model;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<FoldMetrics> folds;  // ordered by fold index
  Summary accuracy;
  Summary macro_f1;
};

void to_json(nlohmann::json& j, const MetricReport& report);
void from_json(const nlohmann::json& j, MetricReport& report);
// Stable text form: sorted keys, no timestamps.
std::string report_json_text(const MetricReport& report);

// What a fold hook sees. Datasets are normalized with the fold's schema.
struct FoldContext {
  const FoldSplit* split = nullptr;
  const TabularDataset* train = nullptr;
  const TabularDataset* validation = nullptr;
  const TabularDataset* test = nullptr;
  const XnnTabModel* model = nullptr;  // set for ModelKind::kXnnTab only
  const std::vector<int>* predictions = nullptr;
};
// Called once per fold after scoring; may run concurrently across folds.
using FoldHook = std::function<void(const FoldContext&)>;

// Per fold: normalization fitted on the training rows, model trained with
// train/validation, scored on the test block. Any failure is rethrown as
// FoldError naming the lowest failing fold.
MetricReport run_cv(const TabularDataset& dataset, ModelKind kind,
                    const EvalConfig& config, std::uint64_t seed,
                    const FoldHook& hook = {});

// Throws ValidationError when test rows overlap training or validation rows
// or any index is out of range.
void check_fold_disjoint(const FoldSplit& split, std::size_t n);

// Model rows in the order logreg, cart, mlp, xnntab; columns Adult and Churn
// F1/accuracy; published reference rows for Random Forest and XGBoost.
std::string render_table(const std::vector<MetricReport>& reports);

struct ReferenceRow {
  const char* model;
  const char* dataset;
  double f1_mean, f1_std, acc_mean, acc_std;
};
// Published numbers for ensembles not built here.
const std::vector<ReferenceRow>& reference_rows();

}  // namespace xnntab

#endif  // XNNTAB_EVAL_HPP_
