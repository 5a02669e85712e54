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

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"
#include "xnntab/adam.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/kernels.hpp"
#include "xnntab/metrics.hpp"
#include "xnntab/serialization.hpp"
#include "xnntab/trainer.hpp"

using namespace xnntab;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng,
                          double lo = -1.0, double hi = 1.0) {
  DenseMatrix m(r, c);
  for (double& v : m.values()) v = uniform(rng, lo, hi);
  return m;
}

TabularDataset toy_dataset(const DenseMatrix& x, Labels y) {
  TabularDataset ds;
  ds.name = "toy";
  ds.schema.dataset = "toy";
  ds.schema.class_names = {"neg", "pos"};
  for (std::size_t f = 0; f < x.cols(); ++f) {
    FeatureDescriptor fd;
    fd.name = "x" + std::to_string(f);
    fd.source_column = fd.name;
    ds.schema.features.push_back(fd);
  }
  ds.raw = x;
  ds.features = x;
  ds.labels = std::move(y);
  return ds;
}

TabularDataset xor_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix x(n, 2);
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = uniform01(rng);
    x(i, 1) = uniform01(rng);
    y[i] = (x(i, 0) > 0.5) != (x(i, 1) > 0.5) ? 1 : 0;
  }
  return toy_dataset(x, y);
}

XnnTabConfig toy_config() {
  XnnTabConfig c;
  c.mlp.hidden = {16, 8};
  c.mlp.dropout = {0.0, 0.0};
  c.mlp.lr = 1e-2;
  c.mlp.l1 = 0.0;
  c.mlp.epochs = 150;
  c.mlp.batch_size = 32;
  c.sae.expansion = 3;
  c.sae.alpha = 1e-3;
  c.sae.lr = 1e-2;
  c.sae.epochs = 100;
  c.sae.batch_size = 32;
  return c;
}

// Sum of |w| over every body and head weight.
double total_abs_weight(const MlpBody& body, const DecisionHead& head) {
  double s = 0.0;
  for (const auto& l : body.layers)
    for (double v : l.weight.values()) s += std::abs(v);
  for (double v : head.weight.values()) s += std::abs(v);
  return s;
}

}  // namespace

TEST_CASE("forward_hidden") {
  Rng rng(1);
  MLPConfig cfg;
  cfg.hidden = {5, 3};
  cfg.dropout = {0.2, 0.1};
  SUBCASE("zero parameters give zero activations") {
    MlpBody body = init_body(4, cfg, rng);
    for (auto& l : body.layers) {
      l.weight = DenseMatrix(l.weight.rows(), l.weight.cols());
      l.bias = DenseMatrix(1, l.bias.cols());
    }
    CHECK(forward_hidden(body, random_matrix(6, 4, rng), false, rng) ==
          DenseMatrix(6, 3));
  }
  SUBCASE("inference is deterministic") {
    const MlpBody body = init_body(4, cfg, rng);
    const DenseMatrix x = random_matrix(1, 4, rng);
    Rng a(10), b(20);
    CHECK(forward_hidden(body, x, false, a) == forward_hidden(body, x, false, b));
  }
  SUBCASE("one layer equals a hand-written composition") {
    MLPConfig one;
    one.hidden = {3};
    one.dropout = {0.5};
    const MlpBody body = init_body(4, one, rng);
    const DenseMatrix x = random_matrix(7, 4, rng);
    const DenseMatrix h = forward_hidden(body, x, false, rng);
    const auto& w = body.layers[0].weight;
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double z = 0.0;
        for (std::size_t k = 0; k < 4; ++k) z += x(i, k) * w(j, k);
        z += body.layers[0].bias(0, j);
        CHECK(h(i, j) == doctest::Approx(z > 0 ? z : 0.0).epsilon(1e-12));
      }
  }
  SUBCASE("width mismatch") {
    const MlpBody body = init_body(4, cfg, rng);
    CHECK_THROWS_AS(forward_hidden(body, DenseMatrix(2, 5), false, rng),
                    DimensionError);
  }
  SUBCASE("initial shapes chain") {
    const MlpBody body = init_body(4, cfg, rng);
    CHECK(body.input_width() == 4);
    CHECK(body.output_width() == 3);
    CHECK(body.layers[1].weight.cols() == body.layers[0].weight.rows());
    const double bound = std::sqrt(6.0 / 4.0);
    for (double v : body.layers[0].weight.values()) CHECK(std::abs(v) <= bound);
  }
}

TEST_CASE("sae encode and decode") {
  Rng rng(2);
  SUBCASE("zero dictionary") {
    SaeModel sae = init_sae(3, 2, 0.0, rng);
    sae.dictionary = DenseMatrix(6, 3);
    const DenseMatrix c = sae_encode(sae, random_matrix(4, 3, rng));
    CHECK(c == DenseMatrix(4, 6));
    CHECK(sae_decode(sae, c) == DenseMatrix(4, 3));
  }
  SUBCASE("codes are nonnegative") {
    SaeModel sae = init_sae(5, 3, 0.0, rng);
    sae.bias = random_matrix(1, 15, rng);
    for (double v : sae_encode(sae, random_matrix(50, 5, rng, -3, 3)).values())
      CHECK(v >= 0.0);
  }
  SUBCASE("hand 2 to 4 autoencoder") {
    SaeModel sae;
    sae.expansion = 2;
    sae.dictionary = DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, -1}, {-1, 2}});
    sae.bias = DenseMatrix::from_rows({{0, -0.5, 0.25, 0}});
    const DenseMatrix h = DenseMatrix::from_rows({{1, 2}, {-1, 0.5}});
    // c = relu(M h + b) per row, h_hat = M^T c
    const DenseMatrix want_c =
        DenseMatrix::from_rows({{1, 1.5, 0, 3}, {0, 0, 0, 2}});
    const DenseMatrix want_h =
        DenseMatrix::from_rows({{1 - 3, 1.5 + 6}, {-2, 4}});
    CHECK(sae_encode(sae, h) == want_c);
    CHECK(sae_decode(sae, want_c) == want_h);
    CHECK(sae.d_hid() == 4);
    CHECK_THROWS_AS(sae_encode(sae, DenseMatrix(1, 3)), DimensionError);
    CHECK_THROWS_AS(sae_decode(sae, DenseMatrix(1, 3)), DimensionError);
  }
  SUBCASE("dictionary size is R times d_in") {
    const SaeModel sae = init_sae(7, 3, 1e-3, rng);
    CHECK(sae.d_hid() == 21);
    CHECK(sae.bias == DenseMatrix(1, 21));
  }
}

TEST_CASE("merge heads") {
  Rng rng(3);
  SUBCASE("identity dictionary") {
    SaeModel sae;
    sae.expansion = 1;
    sae.dictionary = DenseMatrix::identity(3);
    sae.bias = DenseMatrix(1, 3);
    const DecisionHead head{random_matrix(2, 3, rng)};
    CHECK(merge_heads(head, sae).weight == head.weight);
  }
  SUBCASE("brute force product") {
    const DecisionHead head{random_matrix(2, 3, rng)};
    SaeModel sae = init_sae(3, 2, 0.0, rng);
    const DenseMatrix wp = merge_heads(head, sae).weight;
    REQUIRE(wp.rows() == 2);
    REQUIRE(wp.cols() == 6);
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t j = 0; j < 6; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
          s += head.weight(k, i) * sae.dictionary(j, i);
        CHECK(std::abs(wp(k, j) - s) < 1e-12);
      }
  }
  SUBCASE("shape mismatch") {
    SaeModel sae = init_sae(4, 2, 0.0, rng);
    CHECK_THROWS_AS(merge_heads(DecisionHead{DenseMatrix(2, 3)}, sae),
                    DimensionError);
  }
  SUBCASE("merge requires a finetuned model") {
    XnnTabModel model;
    model.stage = Stage::kSaeTrained;
    CHECK_THROWS_AS(merge(model), StateError);
    CHECK_THROWS_AS(predict(model, DenseMatrix(1, 1)), StateError);
  }
}

TEST_CASE("gradients match finite differences") {
  Rng rng(4);
  MLPConfig cfg;
  cfg.hidden = {5, 3};
  cfg.dropout = {0.0, 0.0};
  const std::size_t points = 50;
  for (std::size_t p = 0; p < points; ++p) {
    MlpBody body = init_body(4, cfg, rng);
    // Nonzero biases keep the test point off the relu kinks.
    for (auto& l : body.layers) l.bias = random_matrix(1, l.bias.cols(), rng, -0.1, 0.1);
    const DecisionHead head = init_head(3, 2, rng);
    const DenseMatrix x = random_matrix(6, 4, rng, 0, 1);
    Labels y(6);
    for (int& v : y) v = static_cast<int>(uniform_index(rng, 2));
    const double l1 = p % 2 ? 1e-2 : 0.0;
    const auto g = mlp_loss_and_gradients(body, head, x, y, l1, false, rng);

    auto loss_with = [&](const MlpBody& b, const DecisionHead& h) {
      Rng unused(0);
      return mlp_loss_and_gradients(b, h, x, y, l1, false, unused).loss;
    };
    for (std::size_t l = 0; l < body.layers.size(); ++l) {
      const auto fd_w = finite_difference_grad(
          [&](const DenseMatrix& w) {
            MlpBody b = body;
            b.layers[l].weight = w;
            return loss_with(b, head);
          },
          body.layers[l].weight, 1e-6);
      CHECK(relative_error(g.body.weight[l], fd_w) < 1e-4);
      const auto fd_b = finite_difference_grad(
          [&](const DenseMatrix& v) {
            MlpBody b = body;
            b.layers[l].bias = v;
            return loss_with(b, head);
          },
          body.layers[l].bias, 1e-6);
      CHECK(relative_error(g.body.bias[l], fd_b) < 1e-4);
    }
    const auto fd_head = finite_difference_grad(
        [&](const DenseMatrix& w) { return loss_with(body, DecisionHead{w}); },
        head.weight, 1e-6);
    CHECK(relative_error(g.head, fd_head) < 1e-4);

    // SAE on the same body's activations.
    SaeModel sae = init_sae(4, 2, 0.05, rng);
    sae.bias = random_matrix(1, 8, rng, -0.2, 0.2);
    const DenseMatrix h = random_matrix(6, 4, rng, 0, 1);
    const auto sg = sae_loss_and_gradients(sae, h);
    const auto fd_m = finite_difference_grad(
        [&](const DenseMatrix& m) {
          SaeModel s = sae;
          s.dictionary = m;
          return sae_loss_and_gradients(s, h).loss;
        },
        sae.dictionary, 1e-6);
    CHECK(relative_error(sg.dictionary, fd_m) < 1e-4);
    const auto fd_sb = finite_difference_grad(
        [&](const DenseMatrix& b) {
          SaeModel s = sae;
          s.bias = b;
          return sae_loss_and_gradients(s, h).loss;
        },
        sae.bias, 1e-6);
    CHECK(relative_error(sg.bias, fd_sb) < 1e-4);

    const DecisionHead wide = init_head(4, 2, rng);
    const auto hg = head_loss_and_gradient(wide, h, y, l1);
    const auto fd_w = finite_difference_grad(
        [&](const DenseMatrix& w) {
          return head_loss_and_gradient(DecisionHead{w}, h, y, l1).loss;
        },
        wide.weight, 1e-6);
    CHECK(relative_error(hg.weight, fd_w) < 1e-4);
  }
}

TEST_CASE("sae loss value") {
  // One row, d_in 1, d_hid 1, M = 2, b = 0, h = 1: c = 2, h_hat = 4.
  SaeModel sae;
  sae.expansion = 1;
  sae.dictionary = DenseMatrix::from_rows({{2}});
  sae.bias = DenseMatrix(1, 1);
  const auto g = sae_loss_and_gradients(sae, DenseMatrix::from_rows({{1}}));
  sae.alpha = 0.5;
  const auto ga = sae_loss_and_gradients(sae, DenseMatrix::from_rows({{1}}));
  CHECK(g.loss == doctest::Approx(9.0));
  CHECK(ga.loss == doctest::Approx(9.0 + 0.5 * 2.0));
}

TEST_CASE("train_mlp") {
  SUBCASE("xor toy reaches high training accuracy") {
    const TabularDataset train = xor_dataset(200, 5);
    const TabularDataset val = xor_dataset(100, 6);
    XnnTabConfig cfg = toy_config();
    cfg.mlp.epochs = 300;
    Rng rng(7);
    TrainingLog log;
    const auto [body, head] = train_mlp(cfg.mlp, train, val, rng, &log);
    CHECK(log.records.size() == 300);
    const Labels pred = argmax_rows(
        head_logits(head, collect_activations(body, train.features)));
    CHECK(accuracy(pred, train.labels) > 0.95);
  }
  SUBCASE("huge l1 collapses to the majority class") {
    // Checkpoint selection would hide the limit, so descend the objective
    // directly with the same gradients and optimizer.
    const TabularDataset base = xor_dataset(200, 8);
    Labels y = base.labels;
    for (std::size_t i = 0; i < y.size(); i += 3) y[i] = 0;
    MLPConfig cfg = toy_config().mlp;
    Rng rng(9);
    MlpBody body = init_body(2, cfg, rng);
    DecisionHead head = init_head(8, 2, rng);
    const double initial = total_abs_weight(body, head);
    std::vector<AdamState> opt;
    for (const auto& l : body.layers) {
      opt.push_back(AdamState::for_param(l.weight, 1e-2));
      opt.push_back(AdamState::for_param(l.bias, 1e-2));
    }
    opt.push_back(AdamState::for_param(head.weight, 1e-2));
    for (int step = 0; step < 1500; ++step) {
      const double lr = step < 1000 ? 1e-2 : 1e-4;
      for (auto& o : opt) o.lr = lr;
      const auto g = mlp_loss_and_gradients(body, head, base.features, y, 10.0,
                                            false, rng);
      for (std::size_t l = 0; l < body.layers.size(); ++l) {
        adam_step(body.layers[l].weight, g.body.weight[l], opt[2 * l]);
        adam_step(body.layers[l].bias, g.body.bias[l], opt[2 * l + 1]);
      }
      adam_step(head.weight, g.head, opt.back());
    }
    CHECK(total_abs_weight(body, head) < 0.05 * initial);
    const Labels pred = argmax_rows(
        head_logits(head, collect_activations(body, base.features)));
    std::size_t zeros = 0;
    for (int v : y) zeros += v == 0;
    const int majority = zeros * 2 >= y.size() ? 0 : 1;
    std::size_t agree = 0;
    for (int v : pred) agree += v == majority;
    CHECK(agree >= pred.size() * 95 / 100);
  }
  SUBCASE("invalid configs") {
    const TabularDataset train = xor_dataset(20, 1);
    Rng rng(1);
    MLPConfig bad = toy_config().mlp;
    bad.dropout = {1.0, 0.0};
    CHECK_THROWS_AS(train_mlp(bad, train, train, rng), ValidationError);
    bad = toy_config().mlp;
    bad.lr = 0.0;
    CHECK_THROWS_AS(train_mlp(bad, train, train, rng), ValidationError);
    bad = toy_config().mlp;
    bad.l1 = -1.0;
    CHECK_THROWS_AS(train_mlp(bad, train, train, rng), ValidationError);
  }
  SUBCASE("divergence is reported") {
    DenseMatrix x(4, 2, std::numeric_limits<double>::quiet_NaN());
    const TabularDataset train = toy_dataset(x, {0, 1, 0, 1});
    MLPConfig cfg = toy_config().mlp;
    cfg.epochs = 2;
    Rng rng(1);
    try {
      train_mlp(cfg, train, train, rng);
      FAIL("expected a training error");
    } catch (const TrainingError& e) {
      // relu maps NaN to 0, so the loss first goes bad once the weights do.
      CHECK(std::string(e.what()).find("at epoch 2") != std::string::npos);
    }
  }
}

TEST_CASE("collect_activations") {
  Rng rng(11);
  MLPConfig cfg = toy_config().mlp;
  const MlpBody body = init_body(2, cfg, rng);
  const DenseMatrix x = random_matrix(3, 2, rng, 0, 1);
  const DenseMatrix h = collect_activations(body, x);
  CHECK(h.rows() == 3);
  CHECK(h.cols() == 8);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::vector<std::size_t> one = {i};
    const DenseMatrix hi = forward_hidden(body, x.select_rows(one), false, rng);
    for (std::size_t j = 0; j < 8; ++j) CHECK(hi(0, j) == h(i, j));
  }
}

TEST_CASE("train_sae") {
  Rng rng(12);
  SUBCASE("overcomplete dictionary reconstructs a tiny set") {
    const DenseMatrix h = random_matrix(8, 2, rng, 0, 1);
    SaeConfig cfg;
    cfg.expansion = 8;
    cfg.alpha = 0.0;
    cfg.lr = 1e-2;
    cfg.epochs = 3000;
    cfg.batch_size = 8;
    const SaeModel sae = train_sae(init_sae(2, 8, 0.0, rng), h, cfg, rng);
    const DenseMatrix r = sae_decode(sae, sae_encode(sae, h));
    double mse = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
      mse += std::pow(h.values()[i] - r.values()[i], 2);
    mse /= static_cast<double>(h.rows());
    CHECK(mse < 1e-3);
  }
  SUBCASE("large alpha silences the codes") {
    const DenseMatrix h = random_matrix(64, 3, rng, 0, 1);
    SaeConfig cfg;
    cfg.expansion = 4;
    cfg.alpha = 100.0;
    cfg.lr = 1e-2;
    cfg.epochs = 300;
    cfg.batch_size = 16;
    const SaeModel sae = train_sae(init_sae(3, 4, 100.0, rng), h, cfg, rng);
    double max_code = 0.0;
    for (double v : sae_encode(sae, h).values()) max_code = std::max(max_code, v);
    CHECK(max_code < 1e-3);
  }
  SUBCASE("width mismatch") {
    SaeConfig cfg;
    CHECK_THROWS_AS(train_sae(init_sae(3, 2, 0.0, rng), DenseMatrix(4, 2), cfg, rng),
                    DimensionError);
  }
}

TEST_CASE("staged pipeline") {
  const TabularDataset train = xor_dataset(300, 13);
  const TabularDataset val = xor_dataset(100, 14);
  const XnnTabConfig cfg = toy_config();

  Rng rng(15);
  XnnTabModel model;
  model.config = cfg;
  model.schema = train.schema;
  std::tie(model.body, model.head) = train_mlp(cfg.mlp, train, val, rng);
  model.stage = Stage::kMlpTrained;
  CHECK_THROWS_AS(finetune_decision_layer(model, train, val, 1e-2, 0.0, rng),
                  StateError);

  const MlpBody body_before = model.body;
  const DecisionHead head_before = model.head;
  const DenseMatrix hidden = collect_activations(model.body, train.features);
  model.sae = train_sae(init_sae(8, 3, cfg.sae.alpha, rng), hidden, cfg.sae, rng);
  model.stage = Stage::kSaeTrained;
  // Stage 2 leaves the body and W alone.
  for (std::size_t l = 0; l < body_before.layers.size(); ++l) {
    CHECK(model.body.layers[l].weight == body_before.layers[l].weight);
    CHECK(model.body.layers[l].bias == body_before.layers[l].bias);
  }
  CHECK(model.head.weight == head_before.weight);

  SUBCASE("zero learning rate keeps W") {
    const DecisionHead h = finetune_decision_layer(model, train, val, 0.0, 0.0, rng);
    CHECK(h.weight == model.head.weight);
  }

  const SaeModel sae_before = model.sae;
  TrainingLog log;
  model.head = finetune_decision_layer(model, train, val, cfg.mlp.lr,
                                       cfg.mlp.l1, rng, &log);
  CHECK(log.records.size() == cfg.mlp.epochs + 1);
  CHECK(model.sae.dictionary == sae_before.dictionary);
  CHECK(model.sae.bias == sae_before.bias);
  for (std::size_t l = 0; l < body_before.layers.size(); ++l)
    CHECK(model.body.layers[l].weight == body_before.layers[l].weight);
  model.stage = Stage::kFinetuned;

  // Finetuned path x -> h -> h_hat -> W and merged path share one function.
  const DenseMatrix recon = sae_decode(
      model.sae, sae_encode(model.sae, collect_activations(model.body, val.features)));
  const Labels finetuned_pred = argmax_rows(head_logits(model.head, recon));

  merge(model);
  CHECK(model.stage == Stage::kMerged);
  REQUIRE(model.merged);
  const Prediction p = predict(model, val.features);
  CHECK(std::abs(accuracy(p.classes, val.labels) -
                 accuracy(finetuned_pred, val.labels)) <= 0.01);

  for (std::size_t i = 0; i < val.size(); ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      // Two association orders.
      double contrib = 0.0;
      for (std::size_t j = 0; j < model.sae.d_hid(); ++j)
        contrib += p.codes(i, j) * model.merged->weight(k, j);
      CHECK(std::abs(contrib - p.logits(i, k)) < 1e-6);
      CHECK(std::abs(head_logits(model.head, recon)(i, k) - p.logits(i, k)) < 1e-5);
    }
  }
  for (double v : p.codes.values()) CHECK(v >= 0.0);

  SUBCASE("serialization round trip") {
    std::stringstream buf;
    save_model(model, buf);
    const XnnTabModel back = load_model(buf);
    CHECK(back.stage == Stage::kMerged);
    CHECK(back.merged->weight == model.merged->weight);
    CHECK(back.sae.dictionary == model.sae.dictionary);
    CHECK(predict(back, val.features).logits == p.logits);
    CHECK(back.schema.hash() == model.schema.hash());
  }
  SUBCASE("corrupt files are rejected") {
    std::stringstream buf;
    save_model(model, buf);
    std::string bytes = buf.str();

    std::string bad_magic = bytes;
    bad_magic[0] = 'Y';
    std::stringstream s1(bad_magic);
    CHECK_THROWS_AS(load_model(s1), SchemaError);

    std::stringstream s2(bytes.substr(0, bytes.size() - 16));
    CHECK_THROWS_AS(load_model(s2), Error);

    std::string tampered = bytes;
    const auto pos = tampered.find("\"neg\"");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 5, "\"NEG\"");
    std::stringstream s3(tampered);
    CHECK_THROWS_AS(load_model(s3), SchemaError);

    CHECK_THROWS_AS(load_model(std::filesystem::path("/nonexistent/m.bin")),
                    IoError);
  }
}

TEST_CASE("train_xnntab end to end") {
  const TabularDataset train = xor_dataset(200, 21);
  const TabularDataset val = xor_dataset(80, 22);
  XnnTabConfig cfg = toy_config();
  cfg.mlp.epochs = 40;
  cfg.sae.epochs = 40;
  TrainingLog log;
  const XnnTabModel a = train_xnntab(cfg, train, val, 5, &log);
  const XnnTabModel b = train_xnntab(cfg, train, val, 5);
  CHECK(a.stage == Stage::kMerged);
  CHECK(a.merged->weight == b.merged->weight);
  CHECK(a.merged->weight.rows() == 2);
  CHECK(a.merged->weight.cols() == 24);
  CHECK(log.records.size() == 40 + 40 + 41);
  const auto path = std::filesystem::temp_directory_path() / "xnntab_log.csv";
  log.write_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "stage,epoch,train_loss,validation_metric");
  std::filesystem::remove(path);
}

TEST_CASE("configuration defaults") {
  const XnnTabConfig adult = XnnTabConfig::adult();
  CHECK(adult.mlp.hidden == std::vector<std::size_t>{97, 30, 7});
  CHECK(adult.mlp.dropout == std::vector<double>{0.3, 0.35, 0.23});
  CHECK(adult.mlp.lr == 4e-3);
  CHECK(adult.mlp.l1 == 1e-4);
  CHECK(adult.sae.expansion == 3);
  CHECK(adult.sae.alpha == 1e-3);
  const XnnTabConfig churn = XnnTabConfig::churn();
  CHECK(churn.mlp.hidden == std::vector<std::size_t>{63, 24});
  CHECK(churn.mlp.dropout == std::vector<double>{0.4, 0.3});
  CHECK(churn.mlp.lr == 1e-2);
  CHECK(churn.mlp.l1 == 4e-4);
  CHECK(churn.sae.expansion == 2);
  const nlohmann::json j = adult;
  CHECK(nlohmann::json(j.get<XnnTabConfig>()) == j);
  CHECK_THROWS_AS(XnnTabConfig::for_dataset("iris"), ValidationError);
  CHECK(parse_stage(stage_name(Stage::kFinetuned)) == Stage::kFinetuned);
}
