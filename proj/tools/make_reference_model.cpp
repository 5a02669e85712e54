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

// Builds the frozen Adult reference model and dictionary used by the golden
// explanation tests. The published weights are not available, so the model
// is constructed: a seeded random body and decision layer, then per
// dictionary feature the minimum-norm (M_j, b_j) that reproduces the
// published activations of the two appendix instances and the published
// merged weights W'_j. Features listed as inactive get pre-activation -1.
//
//   make_reference_model <adult-sample.csv> <output-dir>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include "xnntab/dataset.hpp"
#include "xnntab/model.hpp"
#include "xnntab/rules.hpp"
#include "xnntab/serialization.hpp"

using namespace xnntab;

namespace {

struct Target {
  double c_pos = 0.0;  // 0 = inactive
  double c_neg = 0.0;
  double w0 = 0.0;
  double w1 = 0.0;
};

// j -> activations and W' entries from the two local explanation tables.
std::map<std::size_t, Target> targets() {
  return {
      {1, {4.8735, 0, -0.6028, 0.4310}},
      {5, {0, 1.9102, 0.5432, -0.6966}},
      {6, {12.9912, 0.4034, -0.1803, 0.2962}},
      {7, {0, 0.2820, 0.1042, -0.5845}},
      {8, {4.5567, 0, 0.1452, 0.3139}},
      {9, {5.1609, 0.9971, 0.2681, -0.0763}},
      {10, {0, 0.3919, 0.3814, -0.3506}},
      {11, {0, 1.7615, 0.3644, -0.5136}},
      {13, {3.9865, 0, -0.6343, 0.4284}},
      {14, {1.8393, 0.1123, -0.1363, -0.2378}},
      {15, {0, 1.1112, 0.0624, -0.5594}},
      {16, {5.6880, 1.1850, 0.1648, 0.0393}},
      {19, {0, 0.3856, 0.3426, -0.0268}},
      {20, {2.0693, 0.5693, 0.1102, 0.0218}},
      {21, {15.8202, 0, -0.4210, 0.6348}},
  };
}


// Solves the 4x4 system g y = t in place (partial pivoting).
std::array<double, 4> solve4(std::array<std::array<double, 4>, 4> g,
                             std::array<double, 4> t) {
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
    if (std::abs(g[piv][col]) < 1e-12) throw std::runtime_error("singular system");
    std::swap(g[col], g[piv]);
    std::swap(t[col], t[piv]);
    for (int r = col + 1; r < 4; ++r) {
      const double f = g[r][col] / g[col][col];
      for (int c = col; c < 4; ++c) g[r][c] -= f * g[col][c];
      t[r] -= f * t[col];
    }
  }
  std::array<double, 4> y{};
  for (int r = 3; r >= 0; --r) {
    double s = t[r];
    for (int c = r + 1; c < 4; ++c) s -= g[r][c] * y[c];
    y[r] = s / g[r][r];
  }
  return y;
}

Condition cond(const FeatureSchema& s, const char* name, Comparator op, double v) {
  const std::size_t f = s.feature_index(name);
  return {f, s.features[f].display_name(), op, v};
}

std::vector<DictionaryFeature> reference_dictionary(const FeatureSchema& s) {
  using C = Comparator;
  const auto le = C::kLessEqual;
  const auto gt = C::kGreater;
  auto rule = [](std::vector<Condition> cs, std::size_t support, double recall) {
    Rule r;
    r.conditions = std::move(cs);
    r.precision = 1.0;
    r.recall = recall;
    r.support = support;
    return r;
  };
  std::map<std::size_t, DictionaryFeature> d;
  for (std::size_t j = 1; j <= 21; ++j) d[j] = {j, 0, std::nullopt};
  d[5] = {5, 6755, rule({cond(s, "age", le, 26), cond(s, "edu_num", le, 12)}, 4940, 0.73)};
  d[11] = {11, 6217,
           rule({cond(s, "age", le, 26), cond(s, "cg", le, 2969), cond(s, "edu_num", le, 11)},
                4722, 0.76)};
  d[16] = {16, 3863,
           rule({cond(s, "age", le, 22), cond(s, "cg", le, 3389), cond(s, "hpw", le, 43)},
                2604, 0.67)};
  // The published rule for 15 lacks its age threshold; kept without a rule.
  d[15] = {15, 3328, std::nullopt};
  d[9] = {9, 2872, rule({cond(s, "age", le, 24), cond(s, "hpw", le, 31)}, 1919, 0.66)};
  d[21] = {21, 1123, rule({cond(s, "cg", gt, 8296), cond(s, "hpw", gt, 22)}, 751, 0.68)};
  d[6] = {6, 789, rule({cond(s, "age", gt, 35), cond(s, "cg", gt, 9474)}, 700, 0.79)};
  d[20] = {20, 660,
           rule({cond(s, "age", le, 21), cond(s, "edu_num", le, 9), cond(s, "cg", le, 60025),
                 cond(s, "hpw", le, 23)},
                406, 0.61)};
  d[1] = {1, 210, rule({cond(s, "cg", gt, 22587.5)}, 210, 1.00)};
  d[8] = {8, 210, rule({cond(s, "cg", gt, 22588), cond(s, "cl", le, 78)}, 210, 1.00)};
  d[13] = {13, 203, rule({cond(s, "age", gt, 19), cond(s, "cg", gt, 25180)}, 202, 0.99)};
  d[14] = {14, 155, rule({cond(s, "cg", gt, 70655), cond(s, "cl", le, 78)}, 155, 1.00)};
  std::vector<DictionaryFeature> out;
  for (auto& [j, f] : d) out.push_back(f);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_reference_model <adult-sample.csv> <output-dir>\n";
    return 2;
  }
  try {
    XnnTabModel model;
    model.config = XnnTabConfig::adult();
    model.schema = load_adult(argv[1]).schema;
    const std::pair<const char*, std::pair<double, double>> ranges[] = {
        {"age", {17, 90}},         {"fnlwgt", {12285, 1490400}}, {"edu_num", {1, 16}},
        {"cg", {0, 99999}},        {"cl", {0, 4356}},            {"hpw", {1, 99}}};
    for (const auto& [name, mm] : ranges) {
      FeatureDescriptor& fd = model.schema.features[model.schema.feature_index(name)];
      fd.min = mm.first;
      fd.max = mm.second;
    }

    const DenseMatrix raw = DenseMatrix::from_rows(
        {{48, 175622, 15, 99999, 0, 60}, {18, 225859, 10, 2907, 0, 30}});
    const DenseMatrix x = apply_normalization(model.schema, raw);

    // Seeded body whose penultimate outputs separate the two instances.
    const std::size_t d_in = model.config.mlp.hidden.back();
    const std::size_t d_hid = model.config.sae.expansion * d_in;
    DenseMatrix h;
    std::uint64_t seed = 0;
    for (;; ++seed) {
      Rng rng(seed);
      model.body = init_body(x.cols(), model.config.mlp, rng);
      model.head = init_head(d_in, 2, rng);
      Rng unused(0);
      h = forward_hidden(model.body, x, false, unused);
      std::size_t live = 0;
      for (std::size_t k = 0; k < d_in; ++k) live += h(0, k) > 0 && h(1, k) > 0;
      if (live >= 3) break;
    }

    model.sae.expansion = model.config.sae.expansion;
    model.sae.alpha = model.config.sae.alpha;
    model.sae.dictionary = DenseMatrix(d_hid, d_in);
    model.sae.bias = DenseMatrix(1, d_hid);
    const auto tg = targets();
    for (std::size_t j = 1; j <= d_hid; ++j) {
      const auto it = tg.find(j);
      const Target t = it == tg.end() ? Target{} : it->second;
      // Rows: [h_pos, 1], [h_neg, 1], [W_0, 0], [W_1, 0]; unknowns (M_j, b_j).
      std::array<std::vector<double>, 4> a;
      for (int r = 0; r < 2; ++r) {
        a[r].assign(h.row(r).begin(), h.row(r).end());
        a[r].push_back(1.0);
      }
      for (int k = 0; k < 2; ++k) {
        a[2 + k].assign(model.head.weight.row(k).begin(), model.head.weight.row(k).end());
        a[2 + k].push_back(0.0);
      }
      const std::array<double, 4> rhs = {t.c_pos > 0 ? t.c_pos : -1.0,
                                         t.c_neg > 0 ? t.c_neg : -1.0, t.w0, t.w1};
      std::array<std::array<double, 4>, 4> g{};
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          for (std::size_t k = 0; k <= d_in; ++k) g[r][c] += a[r][k] * a[c][k];
      const auto y = solve4(g, rhs);
      for (std::size_t k = 0; k <= d_in; ++k) {
        double v = 0.0;
        for (int r = 0; r < 4; ++r) v += a[r][k] * y[r];
        if (k < d_in) model.sae.dictionary(j - 1, k) = v;
        else model.sae.bias(0, j - 1) = v;
      }
    }
    model.stage = Stage::kFinetuned;
    merge(model);

    const std::filesystem::path dir = argv[2];
    save_model(model, dir / "reference_model.xnnt");
    const auto dict = reference_dictionary(model.schema);
    std::ofstream(dir / "reference_dictionary.json") << dictionary_to_json(dict).dump(2) << "\n";

    const Prediction p = predict(model, x);
    for (int r = 0; r < 2; ++r) {
      std::printf("instance %d: logits %.4f %.4f, active", r, p.logits(r, 0), p.logits(r, 1));
      for (std::size_t j = 0; j < d_hid; ++j)
        if (p.codes(r, j) > 0) std::printf(" %zu", j + 1);
      std::printf("\n");
    }
    std::printf("body seed %llu\n", static_cast<unsigned long long>(seed));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
