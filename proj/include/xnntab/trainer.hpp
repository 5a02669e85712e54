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

// Staged training:
//   1. MLP body + decision layer on cross-entropy + L1 over all weights.
//   2. SAE on the frozen body's penultimate activations.
//   3. Decision layer only, on SAE reconstructions, same loss as stage 1.
//   4. Merge W and M^T into one layer.

#ifndef XNNTAB_TRAINER_HPP_
#define XNNTAB_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xnntab/dataset.hpp"
#include "xnntab/model.hpp"

namespace xnntab {

struct EpochRecord {
  std::string stage;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  // Validation macro-F1 for supervised stages; NaN for the SAE stage.
  double validation_metric = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> records;

  void add(std::string stage, std::size_t epoch, double loss, double metric);
  // stage,epoch,train_loss,validation_metric
  void write_csv(const std::filesystem::path& path) const;
};

struct MlpGradients {
  double loss = 0.0;
  BodyGradients body;
  DenseMatrix head;
};

// Mean cross-entropy + l1 * sum |w| over every weight matrix (biases are not
// penalized). With `training` set, dropout masks are drawn from `rng`.
MlpGradients mlp_loss_and_gradients(const MlpBody& body,
                                    const DecisionHead& head,
                                    const DenseMatrix& x,
                                    std::span<const int> labels, double l1,
                                    bool training, Rng& rng);

struct SaeGradients {
  double loss = 0.0;
  DenseMatrix dictionary;
  DenseMatrix bias;
};

// ||H - H_hat||^2 / n + alpha * sum(c) / n. The tied dictionary receives
// gradient from both its encoder and decoder roles.
SaeGradients sae_loss_and_gradients(const SaeModel& sae,
                                    const DenseMatrix& hidden);

struct HeadGradients {
  double loss = 0.0;
  DenseMatrix weight;
};

HeadGradients head_loss_and_gradient(const DecisionHead& head,
                                     const DenseMatrix& inputs,
                                     std::span<const int> labels, double l1);

// Returns the epoch checkpoint with the best validation macro-F1.
std::pair<MlpBody, DecisionHead> train_mlp(const MLPConfig& config,
                                           const TabularDataset& train,
                                           const TabularDataset& validation,
                                           Rng& rng,
                                           TrainingLog* log = nullptr);

// Penultimate activations with dropout off, one row per instance.
DenseMatrix collect_activations(const MlpBody& body,
                                const DenseMatrix& features);

SaeModel train_sae(const SaeModel& initial, const DenseMatrix& hidden,
                   const SaeConfig& config, Rng& rng,
                   TrainingLog* log = nullptr);

// Requires stage kSaeTrained. Body and SAE are left untouched.
DecisionHead finetune_decision_layer(const XnnTabModel& model,
                                     const TabularDataset& train,
                                     const TabularDataset& validation,
                                     double lr, double l1, Rng& rng,
                                     TrainingLog* log = nullptr);

// All four stages. `train`/`validation` must already be normalized with the
// schema that is stored in the returned model.
XnnTabModel train_xnntab(const XnnTabConfig& config,
                         const TabularDataset& train,
                         const TabularDataset& validation, std::uint64_t seed,
                         TrainingLog* log = nullptr);

}  // namespace xnntab

#endif  // XNNTAB_TRAINER_HPP_
