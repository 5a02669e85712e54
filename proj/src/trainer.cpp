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

#include "xnntab/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "xnntab/adam.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/kernels.hpp"
#include "xnntab/metrics.hpp"

namespace xnntab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> gather_labels(std::span<const int> labels,
                               std::span<const std::size_t> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = labels[rows[i]];
  return out;
}

// Visits consecutive mini-batches of a freshly shuffled row order.
template <typename F>
void for_each_batch(std::size_t n, std::size_t batch_size, Rng& rng, F visit) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), rng);
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t end = std::min(n, begin + batch_size);
    visit(std::span<const std::size_t>(order.data() + begin, end - begin));
  }
}

void require_finite(double loss, const std::string& stage, std::size_t epoch) {
  if (!std::isfinite(loss)) {
    throw TrainingError(stage + " diverged: non-finite loss at epoch " +
                        std::to_string(epoch));
  }
}

double body_l1(const MlpBody& body, const DecisionHead& head, double l1,
               BodyGradients* body_grads, DenseMatrix* head_grad) {
  double total = 0.0;
  for (std::size_t l = 0; l < body.layers.size(); ++l) {
    auto pen = l1_penalty(body.layers[l].weight, l1);
    total += pen.loss;
    if (body_grads) add_inplace(body_grads->weight[l], pen.grad);
  }
  auto pen = l1_penalty(head.weight, l1);
  total += pen.loss;
  if (head_grad) add_inplace(*head_grad, pen.grad);
  return total;
}

double validation_f1(const MlpBody& body, const DecisionHead& head,
                     const TabularDataset& validation) {
  Rng unused(0);
  const DenseMatrix logits = head_logits(
      head, forward_hidden(body, validation.features, false, unused));
  return macro_f1(argmax_rows(logits), validation.labels);
}

}  // namespace

void TrainingLog::add(std::string stage, std::size_t epoch, double loss,
                      double metric) {
  records.push_back({std::move(stage), epoch, loss, metric});
}

void TrainingLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "stage,epoch,train_loss,validation_metric\n";
  out << std::setprecision(10);
  for (const auto& r : records) {
    out << r.stage << ',' << r.epoch << ',' << r.train_loss << ',';
    if (!std::isnan(r.validation_metric)) out << r.validation_metric;
    out << '\n';
  }
}

MlpGradients mlp_loss_and_gradients(const MlpBody& body,
                                    const DecisionHead& head,
                                    const DenseMatrix& x,
                                    std::span<const int> labels, double l1,
                                    bool training, Rng& rng) {
  std::vector<LayerCache> caches;
  const DenseMatrix hidden = forward_hidden_cached(body, x, training, rng, caches);
  const auto ce = softmax_cross_entropy(head_logits(head, hidden), labels);
  MlpGradients g;
  g.head = matmul_tn(ce.grad, hidden);
  g.body = backward_hidden(body, caches, matmul(ce.grad, head.weight));
  g.loss = ce.loss + body_l1(body, head, l1, &g.body, &g.head);
  return g;
}

SaeGradients sae_loss_and_gradients(const SaeModel& sae,
                                    const DenseMatrix& hidden) {
  const double n = static_cast<double>(hidden.rows());
  const DenseMatrix pre =
      add_row_bias(matmul_nt(hidden, sae.dictionary), sae.bias);
  const DenseMatrix codes = relu(pre);
  const DenseMatrix recon = matmul(codes, sae.dictionary);
  const DenseMatrix residual = subtract(recon, hidden);

  SaeGradients g;
  double sq = 0.0;
  for (double r : residual.values()) sq += r * r;
  double activity = 0.0;
  for (double c : codes.values()) activity += c;
  g.loss = sq / n + sae.alpha * activity / n;

  const DenseMatrix grad_recon = scale(residual, 2.0 / n);
  // Decoder role: recon = codes * M.
  g.dictionary = matmul_tn(codes, grad_recon);
  DenseMatrix grad_codes = matmul_nt(grad_recon, sae.dictionary);
  const double sparsity_grad = sae.alpha / n;
  for (double& v : grad_codes.values()) v += sparsity_grad;
  // Encoder role: pre = H * M^T + b.
  const DenseMatrix grad_pre = relu_backward(grad_codes, pre);
  add_inplace(g.dictionary, matmul_tn(grad_pre, hidden));
  g.bias = column_sums(grad_pre);
  return g;
}

HeadGradients head_loss_and_gradient(const DecisionHead& head,
                                     const DenseMatrix& inputs,
                                     std::span<const int> labels, double l1) {
  const auto ce = softmax_cross_entropy(head_logits(head, inputs), labels);
  auto pen = l1_penalty(head.weight, l1);
  HeadGradients g;
  g.loss = ce.loss + pen.loss;
  g.weight = add(matmul_tn(ce.grad, inputs), pen.grad);
  return g;
}

std::pair<MlpBody, DecisionHead> train_mlp(const MLPConfig& config,
                                           const TabularDataset& train,
                                           const TabularDataset& validation,
                                           Rng& rng, TrainingLog* log) {
  config.validate();
  if (train.size() == 0 || validation.size() == 0)
    throw ValidationError("train_mlp: empty train or validation set");

  MlpBody body = init_body(train.features.cols(), config, rng);
  DecisionHead head = init_head(body.output_width(), config.n_classes, rng);

  std::vector<AdamState> weight_opt;
  std::vector<AdamState> bias_opt;
  for (const auto& layer : body.layers) {
    weight_opt.push_back(AdamState::for_param(layer.weight, config.lr));
    bias_opt.push_back(AdamState::for_param(layer.bias, config.lr));
  }
  AdamState head_opt = AdamState::for_param(head.weight, config.lr);

  MlpBody best_body = body;
  DecisionHead best_head = head;
  double best_f1 = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for_each_batch(train.size(), config.batch_size, rng,
                   [&](std::span<const std::size_t> rows) {
      const DenseMatrix xb = train.features.select_rows(rows);
      const auto yb = gather_labels(train.labels, rows);
      auto g = mlp_loss_and_gradients(body, head, xb, yb, config.l1, true, rng);
      require_finite(g.loss, "MLP training", epoch);
      for (std::size_t l = 0; l < body.layers.size(); ++l) {
        adam_step(body.layers[l].weight, g.body.weight[l], weight_opt[l]);
        adam_step(body.layers[l].bias, g.body.bias[l], bias_opt[l]);
      }
      adam_step(head.weight, g.head, head_opt);
      epoch_loss += g.loss;
      ++batches;
    });
    const double f1 = validation_f1(body, head, validation);
    if (log) log->add("mlp", epoch, epoch_loss / batches, f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_body = body;
      best_head = head;
    }
  }
  return {std::move(best_body), std::move(best_head)};
}

DenseMatrix collect_activations(const MlpBody& body,
                                const DenseMatrix& features) {
  Rng unused(0);
  return forward_hidden(body, features, false, unused);
}

SaeModel train_sae(const SaeModel& initial, const DenseMatrix& hidden,
                   const SaeConfig& config, Rng& rng, TrainingLog* log) {
  config.validate();
  if (hidden.rows() == 0) throw ValidationError("train_sae: no activations");
  if (hidden.cols() != initial.d_in()) {
    throw DimensionError("train_sae: activations " + hidden.shape_string() +
                         " vs dictionary " + initial.dictionary.shape_string());
  }
  SaeModel sae = initial;
  AdamState dict_opt = AdamState::for_param(sae.dictionary, config.lr);
  AdamState bias_opt = AdamState::for_param(sae.bias, config.lr);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for_each_batch(hidden.rows(), config.batch_size, rng,
                   [&](std::span<const std::size_t> rows) {
      auto g = sae_loss_and_gradients(sae, hidden.select_rows(rows));
      require_finite(g.loss, "SAE training", epoch);
      adam_step(sae.dictionary, g.dictionary, dict_opt);
      adam_step(sae.bias, g.bias, bias_opt);
      epoch_loss += g.loss;
      ++batches;
    });
    if (log) log->add("sae", epoch, epoch_loss / batches, kNaN);
  }
  return sae;
}

DecisionHead finetune_decision_layer(const XnnTabModel& model,
                                     const TabularDataset& train,
                                     const TabularDataset& validation,
                                     double lr, double l1, Rng& rng,
                                     TrainingLog* log) {
  if (model.stage != Stage::kSaeTrained) {
    throw StateError("finetuning requires a trained SAE, stage is " +
                     stage_name(model.stage));
  }
  if (!(lr >= 0.0)) throw ValidationError("learning rate must be >= 0");
  const auto reconstruct = [&](const DenseMatrix& features) {
    return sae_decode(model.sae,
                      sae_encode(model.sae,
                                 collect_activations(model.body, features)));
  };
  const DenseMatrix train_recon = reconstruct(train.features);
  const DenseMatrix val_recon = reconstruct(validation.features);
  const auto val_f1 = [&](const DecisionHead& head) {
    return macro_f1(argmax_rows(head_logits(head, val_recon)),
                    validation.labels);
  };

  DecisionHead head = model.head;
  DecisionHead best = head;
  double best_f1 = val_f1(head);
  if (log) log->add("finetune", 0, kNaN, best_f1);
  AdamState opt = AdamState::for_param(head.weight, lr);
  const MLPConfig& cfg = model.config.mlp;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for_each_batch(train.size(), cfg.batch_size, rng,
                   [&](std::span<const std::size_t> rows) {
      const auto yb = gather_labels(train.labels, rows);
      auto g = head_loss_and_gradient(head, train_recon.select_rows(rows), yb,
                                      l1);
      require_finite(g.loss, "decision-layer finetuning", epoch);
      if (lr > 0.0) adam_step(head.weight, g.weight, opt);
      epoch_loss += g.loss;
      ++batches;
    });
    const double f1 = val_f1(head);
    if (log) log->add("finetune", epoch, epoch_loss / batches, f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = head;
    }
  }
  return best;
}

XnnTabModel train_xnntab(const XnnTabConfig& config,
                         const TabularDataset& train,
                         const TabularDataset& validation, std::uint64_t seed,
                         TrainingLog* log) {
  config.validate();
  Rng rng(seed);
  XnnTabModel model;
  model.config = config;
  model.schema = train.schema;

  auto [body, head] = train_mlp(config.mlp, train, validation, rng, log);
  model.body = std::move(body);
  model.head = std::move(head);
  model.stage = Stage::kMlpTrained;

  const DenseMatrix hidden = collect_activations(model.body, train.features);
  const SaeModel initial = init_sae(model.body.output_width(),
                                    config.sae.expansion, config.sae.alpha, rng);
  model.sae = train_sae(initial, hidden, config.sae, rng, log);
  model.stage = Stage::kSaeTrained;

  model.head = finetune_decision_layer(model, train, validation, config.mlp.lr,
                                       config.mlp.l1, rng, log);
  model.stage = Stage::kFinetuned;

  merge(model);
  return model;
}

}  // namespace xnntab
