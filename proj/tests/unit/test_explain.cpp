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

#include "doctest.h"
#include "xnntab/errors.hpp"
#include "xnntab/explain.hpp"
#include "xnntab/trainer.hpp"

using namespace xnntab;

namespace {

// Two raw features in [0, 10]; identity body on normalized inputs; four
// dictionary features with hand-set weights.
XnnTabModel tiny_model() {
  XnnTabModel m;
  m.schema.dataset = "toy";
  m.schema.class_names = {"no", "yes"};
  for (const char* name : {"a", "b"}) {
    FeatureDescriptor fd;
    fd.name = name;
    fd.source_column = name;
    fd.min = 0.0;
    fd.max = 10.0;
    m.schema.features.push_back(fd);
  }
  m.config.mlp.hidden = {2};
  m.config.mlp.dropout = {0.0};
  m.config.sae.expansion = 2;
  m.body.layers.push_back({DenseMatrix::identity(2), DenseMatrix(1, 2)});
  m.body.dropout = {0.0};
  m.head.weight = DenseMatrix::from_rows({{1.5, -0.5}, {-1.0, 2.0}});
  m.sae.expansion = 2;
  m.sae.dictionary =
      DenseMatrix::from_rows({{2, 0}, {0, 3}, {1, -1}, {-1, -1}});
  m.sae.bias = DenseMatrix::from_rows({{0, -0.3, 0, 0}});
  m.stage = Stage::kFinetuned;
  merge(m);
  return m;
}

std::vector<DictionaryFeature> tiny_dictionary() {
  Rule r;
  r.conditions = {{0, "a", Comparator::kGreater, 5.0}};
  r.precision = 1.0;
  r.recall = 0.8;
  r.support = 40;
  Rule r2;
  r2.conditions = {{0, "a", Comparator::kLessEqual, 2.0},
                   {1, "b", Comparator::kGreater, 7.5}};
  r2.precision = 1.0;
  r2.recall = 0.5;
  r2.support = 10;
  return {{1, 50, r}, {2, 20, r2}, {3, 0, std::nullopt}, {4, 0, std::nullopt}};
}

}  // namespace

TEST_CASE("local explanation") {
  const XnnTabModel m = tiny_model();
  const auto dict = tiny_dictionary();
  SUBCASE("contributions sum to the logits") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
      const DenseMatrix raw = DenseMatrix::from_rows(
          {{uniform(rng, -2, 12), uniform(rng, -2, 12)}});
      const LocalExplanation e = explain_local(m, dict, raw);
      const Prediction p = predict(m, apply_normalization(m.schema, raw));
      CHECK(e.predicted == p.classes[0]);
      for (std::size_t k = 0; k < 2; ++k) {
        double sum = 0.0;
        for (const auto& a : e.active) sum += a.contributions[k];
        CHECK(std::abs(sum - p.logits(0, k)) < 1e-6);
        CHECK(std::abs(e.logits[k] - p.logits(0, k)) < 1e-6);
      }
      // Listed features are exactly the positive codes, and their weights
      // are the global entries bit for bit.
      std::size_t positive = 0;
      for (double c : p.codes.row(0)) positive += c > 0.0;
      CHECK(e.active.size() == positive);
      for (const auto& a : e.active) {
        CHECK(a.activation == p.codes(0, a.j - 1));
        CHECK(a.weights[0] == m.merged->weight(0, a.j - 1));
        CHECK(a.weights[1] == m.merged->weight(1, a.j - 1));
      }
    }
  }
  SUBCASE("hand-computed instance") {
    // raw (8, 5) -> x (0.8, 0.5); c = (1.6, 1.2, 0.3, 0)
    const LocalExplanation e =
        explain_local(m, dict, DenseMatrix::from_rows({{8, 5}}));
    REQUIRE(e.active.size() == 3);
    CHECK(e.active[0].j == 1);
    CHECK(e.active[0].rule == "a > 5");
    CHECK(e.active[0].activation == doctest::Approx(1.6));
    CHECK(e.active[2].rule == kNoRule);
    // W' = W M^T
    CHECK(e.active[0].weights[0] == doctest::Approx(3.0));
    CHECK(e.active[0].weights[1] == doctest::Approx(-2.0));
    const double l0 = 1.6 * 3.0 + 1.2 * -1.5 + 0.3 * 2.0;
    const double l1 = 1.6 * -2.0 + 1.2 * 6.0 + 0.3 * -3.0;
    CHECK(e.logits[0] == doctest::Approx(l0));
    CHECK(e.logits[1] == doctest::Approx(l1));
    CHECK(e.predicted == (l1 > l0 ? 1 : 0));

    const std::string text = render_local(e);
    CHECK(text.find("Raw instance") != std::string::npos);
    CHECK(text.find("a > 5") != std::string::npos);
    CHECK(text.find("1.6000") != std::string::npos);
    CHECK(text.find("Output logits") != std::string::npos);
    const nlohmann::json j = e;
    CHECK(j["active"].size() == 3);
    CHECK(j["predicted_label"] == "no");  // 3.6 vs 3.1
  }
  SUBCASE("no active features") {
    // raw (0, 0): every code is relu(0 + b) with b <= 0.
    const LocalExplanation e =
        explain_local(m, dict, DenseMatrix::from_rows({{0, 0}}));
    CHECK(e.active.empty());
    CHECK(e.logits == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(explain_local(m, dict, DenseMatrix(1, 3)), ValidationError);
    XnnTabModel unmerged = m;
    unmerged.stage = Stage::kFinetuned;
    unmerged.merged.reset();
    CHECK_THROWS_AS(explain_local(unmerged, dict, DenseMatrix(1, 2)), StateError);
    auto bad = dict;
    bad[0].j = 9;
    CHECK_THROWS_AS(explain_local(m, bad, DenseMatrix(1, 2)), ValidationError);
  }
}

TEST_CASE("global explanation") {
  const XnnTabModel m = tiny_model();
  const GlobalExplanation g = explain_global(m, tiny_dictionary());
  CHECK(g.weights == m.merged->weight);
  CHECK(g.weights.rows() == 2);
  CHECK(g.weights.cols() == 4);
  CHECK(g.annotations[0] == "a > 5");
  CHECK(g.annotations[2] == kNoRule);
  CHECK(g.annotations[3] == kNoRule);
  const std::string csv = heatmap_csv(g);
  CHECK(csv.rfind("class,j1,j2,j3,j4\nno,3,", 0) == 0);
  CHECK(render_global(g).find("a <= 2 and b > 7.5") != std::string::npos);
  const nlohmann::json j = g;
  CHECK(j["weights"][1][1] == m.merged->weight(1, 1));
}

TEST_CASE("complexity statistics") {
  const XnnTabModel m = tiny_model();
  const auto dict = tiny_dictionary();
  Rng rng(2);
  DenseMatrix x(300, 2);
  for (double& v : x.values()) v = uniform01(rng);
  const ComplexityStats s = complexity_stats(m, dict, x);
  CHECK(s.n_rules == 2);
  CHECK(s.rule_length.min == 1.0);
  CHECK(s.rule_length.max == 2.0);
  CHECK(s.rule_length.avg == 1.5);

  // Enumeration oracle straight from the codes.
  const DenseMatrix codes = sae_encode(m.sae, collect_activations(m.body, x));
  double lo = 1e9, hi = 0, sum = 0;
  for (std::size_t i = 0; i < 300; ++i) {
    int n = 0;
    for (std::size_t j = 0; j < 4; ++j) n += codes(i, j) > 0.0;
    lo = std::min<double>(lo, n);
    hi = std::max<double>(hi, n);
    sum += n;
  }
  CHECK(s.active_features.min == lo);
  CHECK(s.active_features.max == hi);
  CHECK(s.active_features.avg == doctest::Approx(sum / 300));
  CHECK(s.active_features.min <= s.active_features.avg);
  CHECK(s.active_features.avg <= s.active_features.max);
  CHECK(render_complexity(s).find("Active features") != std::string::npos);

  const ComplexityStats none = complexity_stats(m, {}, x);
  CHECK(none.n_rules == 0);
  CHECK(none.rule_length.max == 0.0);
}
