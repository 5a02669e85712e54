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
#include <cstring>
#include <iostream>

#include "doctest.h"
#include "test_support.hpp"
#include "toy_data.hpp"
#include "xnntab/baselines.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/folds.hpp"
#include "xnntab/metrics.hpp"

using namespace xnntab;

namespace {

TabularDataset toy(std::size_t n, std::uint64_t seed,
                   double (*label_of)(double, double)) {
  return testing::toy_dataset(n, seed, label_of);
}

double separable(double u, double v) {
  // margin band removed below
  return u + v - 1.0;
}

TabularDataset with_margin(const TabularDataset& ds, double margin) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (std::abs(ds.raw(i, 0) + ds.raw(i, 1) - 1.0) > margin) keep.push_back(i);
  return subset(ds, keep);
}

}  // namespace

TEST_CASE("logreg: separable toy reaches training accuracy 1") {
  const TabularDataset train = with_margin(toy(400, 1, separable), 0.1);
  const TabularDataset val = with_margin(toy(200, 2, separable), 0.1);
  const LogisticModel m = train_logreg(train, val);
  CHECK(accuracy(logreg_predict(m, train.features), train.labels) == 1.0);
  CHECK(m.weight(0, 0) > 0.0);
  CHECK(m.weight(0, 1) > 0.0);
  CHECK(m.intercept < 0.0);
  CHECK((m.max_iter == 100 || m.max_iter == 200));
  CHECK(m.iterations <= m.max_iter);
}

TEST_CASE("logreg: gradient matches finite differences") {
  const TabularDataset ds = toy(50, 3, separable);
  LogisticModel m;
  m.weight = DenseMatrix::from_rows({{0.7, -1.3}});
  m.intercept = 0.2;
  for (double l2 : {0.0, 0.5}) {
    const LogRegLoss g = logreg_loss(m, ds.features, ds.labels, l2);
    const double h = 1e-6;
    for (std::size_t f = 0; f < 2; ++f) {
      LogisticModel p = m, q = m;
      p.weight(0, f) += h;
      q.weight(0, f) -= h;
      const double fd = (logreg_loss(p, ds.features, ds.labels, l2).loss -
                         logreg_loss(q, ds.features, ds.labels, l2).loss) / (2 * h);
      CHECK(g.weight_grad(0, f) == doctest::Approx(fd).epsilon(1e-6));
    }
    LogisticModel p = m, q = m;
    p.intercept += h;
    q.intercept -= h;
    const double fd = (logreg_loss(p, ds.features, ds.labels, l2).loss -
                       logreg_loss(q, ds.features, ds.labels, l2).loss) / (2 * h);
    CHECK(g.intercept_grad == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("logreg: loss at zero parameters is ln 2") {
  const TabularDataset ds = toy(30, 4, separable);
  LogisticModel m;
  m.weight = DenseMatrix(1, 2);
  CHECK(logreg_loss(m, ds.features, ds.labels, 0.0).loss ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("logreg: reruns are bitwise identical") {
  const TabularDataset train = toy(300, 5, separable);
  const TabularDataset val = toy(100, 6, separable);
  const LogisticModel a = train_logreg(train, val);
  const LogisticModel b = train_logreg(train, val);
  CHECK(std::memcmp(a.weight.values().data(), b.weight.values().data(),
                    2 * sizeof(double)) == 0);
  CHECK(std::memcmp(&a.intercept, &b.intercept, sizeof(double)) == 0);
}

TEST_CASE("logreg: config and input errors") {
  const TabularDataset ds = toy(20, 7, separable);
  LogRegConfig bad;
  bad.max_iter_grid = {};
  CHECK_THROWS_AS(train_logreg(ds, ds, bad), ValidationError);
  bad = {};
  bad.lr = 0.0;
  CHECK_THROWS_AS(train_logreg(ds, ds, bad), ValidationError);
  bad = {};
  bad.l2 = -1.0;
  CHECK_THROWS_AS(train_logreg(ds, ds, bad), ValidationError);
  TabularDataset empty = subset(ds, std::vector<std::size_t>{});
  CHECK_THROWS_AS(train_logreg(empty, ds), ValidationError);

  TabularDataset nan = ds;
  nan.features(0, 0) = std::nan("");
  CHECK_THROWS_AS(train_logreg(nan, ds), TrainingError);
}

TEST_CASE("logreg: tolerance stops early on an already optimal start") {
  // Balanced labels on a constant feature: optimum is w = b = 0 exactly.
  TabularDataset ds = toy(10, 8, separable);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ds.features(i, 0) = 0.0;
    ds.features(i, 1) = 0.0;
    ds.labels[i] = static_cast<int>(i % 2);
  }
  const LogisticModel m = train_logreg(ds, ds);
  CHECK(m.iterations == 0);
  CHECK(m.gradient_norm < 1e-12);
}

TEST_CASE("cart: pure data gives a single leaf") {
  TabularDataset ds = toy(50, 9, separable);
  for (int& y : ds.labels) y = 1;
  const CartModel m = train_cart(ds, ds);
  CHECK(m.tree.n_leaves() == 1);
  CHECK(m.tree.nodes().size() == 1);
  for (int p : cart_predict(m, ds.features)) CHECK(p == 1);
}

TEST_CASE("cart: depth picked by validation macro-F1") {
  // Axis-aligned box: a deep tree is needed, shallow ones cannot fit it.
  auto box = [](double u, double v) {
    return (u > 0.2 && u < 0.4 && v > 0.3 && v < 0.9) ||
                   (u > 0.6 && v < 0.15)
               ? 1.0
               : -1.0;
  };
  const TabularDataset train = toy(2000, 10, box);
  const TabularDataset val = toy(1000, 11, box);
  CartConfig cfg;
  cfg.depth_grid = {1, 5};
  const CartModel m = train_cart(train, val, cfg);
  CHECK(m.max_depth == 5);

  // Predicting a training row returns its leaf's majority class.
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& leaf = m.tree.nodes()[m.tree.leaf_of(train.features.row(i))];
    CHECK(m.tree.predict_row(train.features.row(i)) == leaf.majority());
  }
  CHECK(macro_f1(cart_predict(m, val.features), val.labels) > 0.9);
}

TEST_CASE("cart: grid errors") {
  const TabularDataset ds = toy(20, 12, separable);
  CartConfig cfg;
  cfg.depth_grid = {};
  CHECK_THROWS_AS(train_cart(ds, ds, cfg), ValidationError);
  cfg.depth_grid = {0};
  CHECK_THROWS_AS(train_cart(ds, ds, cfg), ValidationError);
}

TEST_CASE("baseline artifacts round trip") {
  const TabularDataset train = toy(200, 13, separable);
  const LogisticModel lr = train_logreg(train, train);
  FeatureSchema schema;
  const LogisticModel lr2 =
      logreg_from_artifact(nlohmann::json::parse(to_artifact(lr, train.schema).dump()),
                           &schema);
  CHECK(schema.hash() == train.schema.hash());
  CHECK(lr2.weight.values()[0] == lr.weight.values()[0]);
  CHECK(lr2.intercept == lr.intercept);

  const CartModel cart = train_cart(train, train);
  const CartModel cart2 = cart_from_artifact(
      nlohmann::json::parse(to_artifact(cart, train.schema).dump()), nullptr);
  CHECK(cart_predict(cart2, train.features) == cart_predict(cart, train.features));
  CHECK_THROWS_AS(cart_from_artifact(to_artifact(lr, train.schema), nullptr),
                  SchemaError);
}

TEST_CASE("baselines on Adult fold 0") {
  const auto path = testing::dataset_file("adult");
  if (!path) {
    MESSAGE("adult.csv not found; skipped");
    return;
  }
  const TabularDataset all = load_adult(*path);
  const auto folds = make_folds(all.size(), 0);
  const FoldSplit& f = folds[0];
  const FeatureSchema schema = fit_normalization(all, f.train);
  const TabularDataset norm = renormalized(all, schema);
  const TabularDataset train = subset(norm, f.train);
  const TabularDataset val = subset(norm, f.validation);
  const TabularDataset test = subset(norm, f.test);

  const LogisticModel lr = train_logreg(train, val);
  const Labels lp = logreg_predict(lr, test.features);
  const CartModel cart = train_cart(train, val);
  const Labels cp = cart_predict(cart, test.features);
  std::cout << "adult fold 0 logreg acc " << accuracy(lp, test.labels) << " f1 "
            << macro_f1(lp, test.labels) << " (iters " << lr.iterations
            << ", budget " << lr.max_iter << ")\n"
            << "adult fold 0 cart acc " << accuracy(cp, test.labels) << " f1 "
            << macro_f1(cp, test.labels) << " (depth " << cart.max_depth << ")\n";
  // Single-fold sanity band, wider than the cross-validated tolerance.
  CHECK(std::abs(macro_f1(lp, test.labels) - 0.691) < 0.03);
  CHECK(std::abs(macro_f1(cp, test.labels) - 0.709) < 0.04);
  CHECK(lr.gradient_norm < 1e-4);
}
