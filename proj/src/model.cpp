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

#include "xnntab/model.hpp"

#include <cmath>

#include "xnntab/errors.hpp"
#include "xnntab/kernels.hpp"

namespace xnntab {

void MLPConfig::validate() const {
  if (hidden.empty()) throw ValidationError("MLP needs at least one layer");
  if (dropout.size() != hidden.size())
    throw ValidationError("one dropout rate per hidden layer is required");
  for (std::size_t w : hidden)
    if (w == 0) throw ValidationError("hidden layer sizes must be positive");
  for (double r : dropout)
    if (!(r >= 0.0 && r < 1.0))
      throw ValidationError("dropout rates must lie in [0, 1)");
  if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
  if (!(l1 >= 0.0)) throw ValidationError("L1 coefficient must be >= 0");
  if (epochs == 0 || batch_size == 0)
    throw ValidationError("epochs and batch size must be positive");
  if (n_classes != 2) throw ValidationError("only binary heads are supported");
}

void SaeConfig::validate() const {
  if (expansion == 0) throw ValidationError("expansion factor must be >= 1");
  if (!(alpha >= 0.0)) throw ValidationError("sparsity weight must be >= 0");
  if (!(lr > 0.0)) throw ValidationError("SAE learning rate must be > 0");
  if (epochs == 0 || batch_size == 0)
    throw ValidationError("SAE epochs and batch size must be positive");
}

void XnnTabConfig::validate() const {
  mlp.validate();
  sae.validate();
}

XnnTabConfig XnnTabConfig::adult() {
  XnnTabConfig c;
  c.mlp.hidden = {97, 30, 7};
  c.mlp.dropout = {0.3, 0.35, 0.23};
  c.mlp.lr = 4e-3;
  c.mlp.l1 = 1e-4;
  c.sae.expansion = 3;
  c.sae.alpha = 1e-3;
  return c;
}

XnnTabConfig XnnTabConfig::churn() {
  XnnTabConfig c;
  c.mlp.hidden = {63, 24};
  c.mlp.dropout = {0.4, 0.3};
  c.mlp.lr = 1e-2;
  c.mlp.l1 = 4e-4;
  c.sae.expansion = 2;
  c.sae.alpha = 1e-3;
  return c;
}

XnnTabConfig XnnTabConfig::for_dataset(const std::string& name) {
  if (name == "adult") return adult();
  if (name == "churn") return churn();
  throw ValidationError("no default configuration for dataset '" + name + "'");
}

void to_json(nlohmann::json& j, const XnnTabConfig& config) {
  j = {{"mlp",
        {{"hidden", config.mlp.hidden},
         {"dropout", config.mlp.dropout},
         {"lr", config.mlp.lr},
         {"l1", config.mlp.l1},
         {"epochs", config.mlp.epochs},
         {"batch_size", config.mlp.batch_size},
         {"n_classes", config.mlp.n_classes}}},
       {"sae",
        {{"expansion", config.sae.expansion},
         {"alpha", config.sae.alpha},
         {"lr", config.sae.lr},
         {"epochs", config.sae.epochs},
         {"batch_size", config.sae.batch_size}}}};
}

void from_json(const nlohmann::json& j, XnnTabConfig& config) {
  const auto& m = j.at("mlp");
  config.mlp.hidden = m.at("hidden").get<std::vector<std::size_t>>();
  config.mlp.dropout = m.at("dropout").get<std::vector<double>>();
  config.mlp.lr = m.at("lr").get<double>();
  config.mlp.l1 = m.at("l1").get<double>();
  config.mlp.epochs = m.at("epochs").get<std::size_t>();
  config.mlp.batch_size = m.at("batch_size").get<std::size_t>();
  config.mlp.n_classes = m.at("n_classes").get<std::size_t>();
  const auto& s = j.at("sae");
  config.sae.expansion = s.at("expansion").get<std::size_t>();
  config.sae.alpha = s.at("alpha").get<double>();
  config.sae.lr = s.at("lr").get<double>();
  config.sae.epochs = s.at("epochs").get<std::size_t>();
  config.sae.batch_size = s.at("batch_size").get<std::size_t>();
}

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::kMlpTrained: return "mlp_trained";
    case Stage::kSaeTrained: return "sae_trained";
    case Stage::kFinetuned: return "finetuned";
    case Stage::kMerged: return "merged";
  }
  return "unknown";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::kMlpTrained, Stage::kSaeTrained, Stage::kFinetuned,
                  Stage::kMerged}) {
    if (stage_name(s) == name) return s;
  }
  throw SchemaError("unknown stage '" + name + "'");
}

std::size_t MlpBody::input_width() const {
  return layers.empty() ? 0 : layers.front().weight.cols();
}

std::size_t MlpBody::output_width() const {
  return layers.empty() ? 0 : layers.back().weight.rows();
}

namespace {

DenseMatrix uniform_matrix(std::size_t rows, std::size_t cols, double bound,
                           Rng& rng) {
  DenseMatrix out(rows, cols);
  for (double& v : out.values()) v = uniform(rng, -bound, bound);
  return out;
}

void check_width(const char* what, std::size_t got, std::size_t expected) {
  if (got != expected) {
    throw DimensionError(std::string(what) + ": expected width " +
                         std::to_string(expected) + ", got " +
                         std::to_string(got));
  }
}

}  // namespace

MlpBody init_body(std::size_t input_width, const MLPConfig& config, Rng& rng) {
  config.validate();
  MlpBody body;
  body.dropout = config.dropout;
  std::size_t fan_in = input_width;
  for (std::size_t width : config.hidden) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    body.layers.push_back(
        {uniform_matrix(width, fan_in, bound, rng), DenseMatrix(1, width)});
    fan_in = width;
  }
  return body;
}

DecisionHead init_head(std::size_t d_in, std::size_t n_classes, Rng& rng) {
  return {uniform_matrix(n_classes, d_in,
                         1.0 / std::sqrt(static_cast<double>(d_in)), rng)};
}

SaeModel init_sae(std::size_t d_in, std::size_t expansion, double alpha,
                  Rng& rng) {
  SaeModel sae;
  sae.expansion = expansion;
  sae.alpha = alpha;
  sae.dictionary = uniform_matrix(expansion * d_in, d_in,
                                  1.0 / std::sqrt(static_cast<double>(d_in)),
                                  rng);
  sae.bias = DenseMatrix(1, expansion * d_in);
  return sae;
}

DenseMatrix forward_hidden_cached(const MlpBody& body, const DenseMatrix& x,
                                  bool training, Rng& rng,
                                  std::vector<LayerCache>& caches) {
  check_width("forward_hidden", x.cols(), body.input_width());
  caches.clear();
  caches.reserve(body.layers.size());
  DenseMatrix current = x;
  for (std::size_t l = 0; l < body.layers.size(); ++l) {
    const DenseLayer& layer = body.layers[l];
    LayerCache cache;
    cache.input = current;
    cache.pre = add_row_bias(matmul_nt(current, layer.weight), layer.bias);
    const double rate = l < body.dropout.size() ? body.dropout[l] : 0.0;
    auto dropped = dropout_forward(relu(cache.pre), rate, rng, training);
    cache.post = std::move(dropped.out);
    cache.mask = std::move(dropped.mask);
    cache.dropout_rate = rate;
    current = cache.post;
    caches.push_back(std::move(cache));
  }
  return current;
}

DenseMatrix forward_hidden(const MlpBody& body, const DenseMatrix& x,
                           bool training, Rng& rng) {
  check_width("forward_hidden", x.cols(), body.input_width());
  DenseMatrix current = x;
  for (std::size_t l = 0; l < body.layers.size(); ++l) {
    const DenseLayer& layer = body.layers[l];
    const double rate = l < body.dropout.size() ? body.dropout[l] : 0.0;
    current = dropout_forward(
                  relu(add_row_bias(matmul_nt(current, layer.weight),
                                    layer.bias)),
                  rate, rng, training)
                  .out;
  }
  return current;
}

BodyGradients backward_hidden(const MlpBody& body,
                              const std::vector<LayerCache>& caches,
                              const DenseMatrix& grad_hidden) {
  if (caches.size() != body.layers.size())
    throw StateError("backward_hidden: cache does not match the body");
  BodyGradients grads;
  grads.weight.resize(body.layers.size());
  grads.bias.resize(body.layers.size());
  DenseMatrix upstream = grad_hidden;
  for (std::size_t l = body.layers.size(); l-- > 0;) {
    const LayerCache& cache = caches[l];
    if (cache.mask) {
      upstream = scale(hadamard(upstream, *cache.mask),
                       1.0 / (1.0 - cache.dropout_rate));
    }
    const DenseMatrix grad_pre = relu_backward(upstream, cache.pre);
    grads.weight[l] = matmul_tn(grad_pre, cache.input);
    grads.bias[l] = column_sums(grad_pre);
    if (l > 0) upstream = matmul(grad_pre, body.layers[l].weight);
  }
  return grads;
}

DenseMatrix head_logits(const DecisionHead& head, const DenseMatrix& hidden) {
  check_width("head_logits", hidden.cols(), head.weight.cols());
  return matmul_nt(hidden, head.weight);
}

DenseMatrix sae_encode(const SaeModel& sae, const DenseMatrix& hidden) {
  check_width("sae_encode", hidden.cols(), sae.d_in());
  return relu(add_row_bias(matmul_nt(hidden, sae.dictionary), sae.bias));
}

DenseMatrix sae_decode(const SaeModel& sae, const DenseMatrix& codes) {
  check_width("sae_decode", codes.cols(), sae.d_hid());
  return matmul(codes, sae.dictionary);
}

MergedHead merge_heads(const DecisionHead& head, const SaeModel& sae) {
  if (head.weight.cols() != sae.d_in()) {
    throw DimensionError("merge_heads: W " + head.weight.shape_string() +
                         " vs M " + sae.dictionary.shape_string());
  }
  return {matmul_nt(head.weight, sae.dictionary)};
}

DenseMatrix merged_logits(const MergedHead& merged, const DenseMatrix& codes) {
  check_width("merged_logits", codes.cols(), merged.weight.cols());
  return matmul_nt(codes, merged.weight);
}

void merge(XnnTabModel& model) {
  if (model.stage != Stage::kFinetuned) {
    throw StateError("merge requires a finetuned model, stage is " +
                     stage_name(model.stage));
  }
  model.merged = merge_heads(model.head, model.sae);
  model.stage = Stage::kMerged;
}

Prediction predict(const XnnTabModel& model, const DenseMatrix& features) {
  if (model.stage != Stage::kMerged || !model.merged) {
    throw StateError("predict requires a merged model, stage is " +
                     stage_name(model.stage));
  }
  Rng unused(0);
  Prediction p;
  p.codes = sae_encode(model.sae,
                       forward_hidden(model.body, features, false, unused));
  p.logits = merged_logits(*model.merged, p.codes);
  p.classes = argmax_rows(p.logits);
  return p;
}

}  // namespace xnntab
