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

// Rule semantics for dictionary features. For feature j the training rows
// with c_j > t form T_j; bagged shallow trees propose conjunctions that
// describe T_j and the one with the highest recall at full precision wins.

#ifndef XNNTAB_RULES_HPP_
#define XNNTAB_RULES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "xnntab/dataset.hpp"
#include "xnntab/model.hpp"
#include "xnntab/tree.hpp"

namespace xnntab {

enum class Comparator { kLessEqual, kGreater, kEqual };

std::string comparator_symbol(Comparator op);
Comparator parse_comparator(const std::string& symbol);

struct Condition {
  std::size_t feature = 0;  // schema feature index
  std::string name;         // display name
  Comparator op = Comparator::kLessEqual;
  double threshold = 0.0;   // raw units; 0 or 1 for ==

  bool holds(double raw) const;
  std::string to_string() const;
  bool operator==(const Condition&) const = default;
};

struct Rule {
  std::vector<Condition> conditions;  // conjunction
  double precision = 0.0;
  double recall = 0.0;
  std::size_t support = 0;  // covered positives

  bool covers(std::span<const double> raw_row) const;
  std::string to_string() const;
};

struct RuleStats {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t support = 0;
  std::size_t covered = 0;
};

// Precision and recall of `rule` against binary `positives`, recomputed on
// every row of `raw`. Precision of a rule covering nothing is 0.
RuleStats evaluate_rule(const Rule& rule, const DenseMatrix& raw,
                        std::span<const int> positives);

struct RuleMinerConfig {
  double threshold = 0.9;  // t
  double precision_min = 1.0;
  double recall_min = 0.2;
  std::size_t max_depth = 4;
  std::size_t n_estimators = 30;
  double max_samples = 0.8;  // subsample share per tree, drawn without replacement
  std::uint64_t seed = 0;
  void validate() const;
};

void to_json(nlohmann::json& j, const RuleMinerConfig& config);
void from_json(const nlohmann::json& j, RuleMinerConfig& config);

struct DictionaryFeature {
  std::size_t j = 0;       // 1-based
  std::size_t t_size = 0;  // |T_j|
  std::optional<Rule> rule;
};

// Rows i with codes(i, j - 1) > t. `j` is 1-based.
std::vector<std::size_t> activating_subset(const DenseMatrix& codes,
                                           std::size_t j, double t);

// Deduplicated candidates meeting the precision and recall floors, in a
// canonical order. `raw` is in raw units; thresholds come out in raw units.
std::vector<Rule> mine_candidate_rules(const DenseMatrix& raw,
                                       std::span<const int> positives,
                                       const FeatureSchema& schema,
                                       const RuleMinerConfig& config, Rng& rng,
                                       const SortedColumns* presorted = nullptr);

// Highest recall; ties go to fewer conditions, then the lexicographically
// smaller condition list.
std::optional<Rule> select_rule(std::span<const Rule> candidates);

// One entry per dictionary feature. Features are mined in parallel, each
// with a generator derived from (config.seed, j).
std::vector<DictionaryFeature> build_dictionary(const XnnTabModel& model,
                                                const TabularDataset& train,
                                                const RuleMinerConfig& config);

void to_json(nlohmann::json& j, const Rule& rule);
void from_json(const nlohmann::json& j, Rule& rule);
nlohmann::json dictionary_to_json(std::span<const DictionaryFeature> dictionary);
// Rebinds condition feature indices against `schema`.
std::vector<DictionaryFeature> dictionary_from_json(const nlohmann::json& j,
                                                    const FeatureSchema& schema);

// Fixed-width table sorted by |T_j|: j, |T_j|, description, coverage as
// "support / recall". Rule-less features are listed only on request.
std::string render_dictionary_table(std::span<const DictionaryFeature> dictionary,
                                    bool include_rule_less = false);

// Shortest round-trip decimal.
std::string format_number(double v);

}  // namespace xnntab

#endif  // XNNTAB_RULES_HPP_
