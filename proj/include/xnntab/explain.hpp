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

// Local and global explanations through the merged head. A prediction is
// the sum of c_j * W'[k][j] over active features j, with nothing left over.

#ifndef XNNTAB_EXPLAIN_HPP_
#define XNNTAB_EXPLAIN_HPP_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "xnntab/model.hpp"
#include "xnntab/rules.hpp"

namespace xnntab {

inline constexpr const char* kNoRule = "(no rule)";

struct ActiveFeature {
  std::size_t j = 0;  // 1-based
  std::string rule;   // rule text or kNoRule
  double activation = 0.0;
  std::vector<double> weights;        // W'[k][j] per class
  std::vector<double> contributions;  // activation * weights[k]
};

struct LocalExplanation {
  std::vector<std::string> feature_names;
  std::vector<double> raw;  // instance in raw units
  std::vector<ActiveFeature> active;
  std::vector<double> logits;  // per-class sums of contributions
  int predicted = 0;
  std::vector<std::string> class_names;
};

// `raw_row` is one instance in raw units (1 x n_features).
LocalExplanation explain_local(const XnnTabModel& model,
                               std::span<const DictionaryFeature> dictionary,
                               const DenseMatrix& raw_row);

struct GlobalExplanation {
  DenseMatrix weights;  // W', n_classes x d_hid
  std::vector<std::string> annotations;  // one per dictionary feature
  std::vector<std::string> class_names;
};

GlobalExplanation explain_global(const XnnTabModel& model,
                                 std::span<const DictionaryFeature> dictionary);

struct StatRange {
  double min = 0.0;
  double avg = 0.0;
  double max = 0.0;
};

struct ComplexityStats {
  StatRange rule_length;      // over features that carry a rule
  StatRange active_features;  // |{j : c_j > 0}| per instance
  std::size_t n_rules = 0;
  std::size_t n_instances = 0;
};

// `features` are normalized model inputs.
ComplexityStats complexity_stats(const XnnTabModel& model,
                                 std::span<const DictionaryFeature> dictionary,
                                 const DenseMatrix& features);

std::string render_local(const LocalExplanation& e);
std::string render_global(const GlobalExplanation& g);
std::string render_complexity(const ComplexityStats& s);
// Heatmap grid: header "class,j1,...", one row per class.
std::string heatmap_csv(const GlobalExplanation& g);

void to_json(nlohmann::json& j, const LocalExplanation& e);
void to_json(nlohmann::json& j, const GlobalExplanation& g);
void to_json(nlohmann::json& j, const ComplexityStats& s);

}  // namespace xnntab

#endif  // XNNTAB_EXPLAIN_HPP_
