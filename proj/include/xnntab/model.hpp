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

// The XNNTab network: an MLP body g(x) producing the penultimate
// representation h, a bias-free decision layer W, and a tied-weight sparse
// autoencoder (M, b) whose codes c = relu(h M^T + b) reconstruct h as c M.
// After training, W' = W M^T maps codes straight to logits, so every logit is
// an exact sum of per-feature contributions c_j * W'[k][j].

#ifndef XNNTAB_MODEL_HPP_
#define XNNTAB_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xnntab/dataset.hpp"
#include "xnntab/matrix.hpp"
#include "xnntab/ops.hpp"
#include "xnntab/rng.hpp"

namespace xnntab {

struct MLPConfig {
  std::vector<std::size_t> hidden;
  std::vector<double> dropout;
  double lr = 1e-3;
  double l1 = 0.0;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  std::size_t n_classes = 2;

  void validate() const;
};

struct SaeConfig {
  std::size_t expansion = 1;  // R; dictionary size is R * d_in
  double alpha = 1e-3;        // sparsity weight
  double lr = 1e-4;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;

  void validate() const;
};

struct XnnTabConfig {
  MLPConfig mlp;
  SaeConfig sae;

  // Architectures and rates found for the two benchmark datasets.
  static XnnTabConfig adult();
  static XnnTabConfig churn();
  static XnnTabConfig for_dataset(const std::string& name);
  void validate() const;
};

void to_json(nlohmann::json& j, const XnnTabConfig& config);
void from_json(const nlohmann::json& j, XnnTabConfig& config);

struct DenseLayer {
  DenseMatrix weight;  // out x in
  DenseMatrix bias;    // 1 x out
};

struct MlpBody {
  std::vector<DenseLayer> layers;
  std::vector<double> dropout;  // one rate per layer

  std::size_t input_width() const;
  std::size_t output_width() const;  // d_in of the SAE
};

struct DecisionHead {
  DenseMatrix weight;  // n_classes x d_in, no bias
};

struct SaeModel {
  std::size_t expansion = 1;
  double alpha = 0.0;
  DenseMatrix dictionary;  // M, d_hid x d_in; the decoder is its transpose
  DenseMatrix bias;        // b, 1 x d_hid

  std::size_t d_in() const { return dictionary.cols(); }
  std::size_t d_hid() const { return dictionary.rows(); }
};

struct MergedHead {
  DenseMatrix weight;  // W' = W M^T, n_classes x d_hid
};

enum class Stage { kMlpTrained, kSaeTrained, kFinetuned, kMerged };

std::string stage_name(Stage stage);
Stage parse_stage(const std::string& name);

struct XnnTabModel {
  XnnTabConfig config;
  FeatureSchema schema;
  MlpBody body;
  DecisionHead head;
  SaeModel sae;
  std::optional<MergedHead> merged;
  Stage stage = Stage::kMlpTrained;
};

// He-uniform weights (bound sqrt(6 / fan_in)) and zero biases.
MlpBody init_body(std::size_t input_width, const MLPConfig& config, Rng& rng);
// Uniform in +-1/sqrt(fan_in).
DecisionHead init_head(std::size_t d_in, std::size_t n_classes, Rng& rng);
// M uniform in +-1/sqrt(d_in), b = 0.
SaeModel init_sae(std::size_t d_in, std::size_t expansion, double alpha,
                  Rng& rng);

// linear -> relu -> dropout per layer; dropout only when `training`.
DenseMatrix forward_hidden(const MlpBody& body, const DenseMatrix& x,
                           bool training, Rng& rng);
DenseMatrix forward_hidden_cached(const MlpBody& body, const DenseMatrix& x,
                                  bool training, Rng& rng,
                                  std::vector<LayerCache>& caches);

struct BodyGradients {
  std::vector<DenseMatrix> weight;
  std::vector<DenseMatrix> bias;
};

// Backpropagates d loss / d h through the cached forward pass.
BodyGradients backward_hidden(const MlpBody& body,
                              const std::vector<LayerCache>& caches,
                              const DenseMatrix& grad_hidden);

DenseMatrix head_logits(const DecisionHead& head, const DenseMatrix& hidden);

// c = relu(h M^T + b)
DenseMatrix sae_encode(const SaeModel& sae, const DenseMatrix& hidden);
// h_hat = c M
DenseMatrix sae_decode(const SaeModel& sae, const DenseMatrix& codes);

MergedHead merge_heads(const DecisionHead& head, const SaeModel& sae);
DenseMatrix merged_logits(const MergedHead& merged, const DenseMatrix& codes);

// Marks the model merged; requires stage kFinetuned.
void merge(XnnTabModel& model);

struct Prediction {
  DenseMatrix logits;       // n x n_classes
  std::vector<int> classes;
  DenseMatrix codes;        // n x d_hid
};

// Inference on normalized features through the merged head.
Prediction predict(const XnnTabModel& model, const DenseMatrix& features);

}  // namespace xnntab

#endif  // XNNTAB_MODEL_HPP_
