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

#include "xnntab/rules.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "xnntab/errors.hpp"
#include "xnntab/trainer.hpp"

namespace xnntab {

namespace {

bool condition_less(const Condition& a, const Condition& b) {
  return std::tie(a.feature, a.op, a.threshold) <
         std::tie(b.feature, b.op, b.threshold);
}

bool conditions_less(const std::vector<Condition>& a,
                     const std::vector<Condition>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      condition_less);
}

// Tightest bound per feature and direction; binary splits become equality
// tests. Sorted by (feature, comparator).
std::vector<Condition> canonical_conditions(std::span<const PathStep> steps,
                                            const FeatureSchema& schema) {
  std::map<std::pair<std::size_t, Comparator>, double> bounds;
  for (const PathStep& s : steps) {
    const Comparator op = s.left ? Comparator::kLessEqual : Comparator::kGreater;
    const auto key = std::make_pair(s.feature, op);
    auto it = bounds.find(key);
    if (it == bounds.end()) {
      bounds.emplace(key, s.threshold);
    } else if (op == Comparator::kLessEqual) {
      it->second = std::min(it->second, s.threshold);
    } else {
      it->second = std::max(it->second, s.threshold);
    }
  }
  std::vector<Condition> out;
  for (const auto& [key, threshold] : bounds) {
    const FeatureDescriptor& fd = schema.features.at(key.first);
    Condition c;
    c.feature = key.first;
    c.name = fd.display_name();
    c.op = key.second;
    c.threshold = threshold;
    if (fd.kind == FeatureKind::kBinary && threshold >= 0.0 && threshold < 1.0) {
      c.threshold = c.op == Comparator::kLessEqual ? 0.0 : 1.0;
      c.op = Comparator::kEqual;
    }
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), condition_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> subsample(std::size_t n, double share, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(share * static_cast<double>(n)));
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

std::string comparator_symbol(Comparator op) {
  switch (op) {
    case Comparator::kLessEqual: return "<=";
    case Comparator::kGreater: return ">";
    case Comparator::kEqual: return "==";
  }
  return "?";
}

Comparator parse_comparator(const std::string& symbol) {
  if (symbol == "<=") return Comparator::kLessEqual;
  if (symbol == ">") return Comparator::kGreater;
  if (symbol == "==") return Comparator::kEqual;
  throw SchemaError("unknown comparator '" + symbol + "'");
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool Condition::holds(double raw) const {
  switch (op) {
    case Comparator::kLessEqual: return raw <= threshold;
    case Comparator::kGreater: return raw > threshold;
    case Comparator::kEqual: return raw == threshold;
  }
  return false;
}

std::string Condition::to_string() const {
  if (op == Comparator::kEqual)
    return name + " == " + (threshold == 1.0 ? "True" : "False");
  return name + " " + comparator_symbol(op) + " " + format_number(threshold);
}

bool Rule::covers(std::span<const double> raw_row) const {
  for (const Condition& c : conditions)
    if (!c.holds(raw_row[c.feature])) return false;
  return true;
}

std::string Rule::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (i) s += " and ";
    s += conditions[i].to_string();
  }
  return s;
}

RuleStats evaluate_rule(const Rule& rule, const DenseMatrix& raw,
                        std::span<const int> positives) {
  if (positives.size() != raw.rows())
    throw DimensionError("evaluate_rule: label count differs from rows");
  for (const Condition& c : rule.conditions)
    if (c.feature >= raw.cols())
      throw ValidationError("rule refers to feature " + std::to_string(c.feature));
  RuleStats st;
  std::size_t n_pos = 0;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    n_pos += positives[r] == 1;
    if (!rule.covers(raw.row(r))) continue;
    ++st.covered;
    st.support += positives[r] == 1;
  }
  st.precision = st.covered ? static_cast<double>(st.support) /
                                  static_cast<double>(st.covered)
                            : 0.0;
  st.recall = n_pos ? static_cast<double>(st.support) / static_cast<double>(n_pos)
                    : 0.0;
  return st;
}

void RuleMinerConfig::validate() const {
  if (!(recall_min > 0.0 && recall_min <= 1.0))
    throw ValidationError("recall_min must be in (0, 1]");
  if (!(precision_min > 0.0 && precision_min <= 1.0))
    throw ValidationError("precision_min must be in (0, 1]");
  if (max_depth < 1) throw ValidationError("rule max_depth must be >= 1");
  if (n_estimators < 1) throw ValidationError("n_estimators must be >= 1");
  if (!(max_samples > 0.0 && max_samples <= 1.0))
    throw ValidationError("max_samples must be in (0, 1]");
  if (!std::isfinite(threshold))
    throw ValidationError("activation threshold must be finite");
}

void to_json(nlohmann::json& j, const RuleMinerConfig& c) {
  j = {{"threshold", c.threshold},         {"precision_min", c.precision_min},
       {"recall_min", c.recall_min},       {"max_depth", c.max_depth},
       {"n_estimators", c.n_estimators},   {"max_samples", c.max_samples},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RuleMinerConfig& c) {
  RuleMinerConfig d;
  c.threshold = j.value("threshold", d.threshold);
  c.precision_min = j.value("precision_min", d.precision_min);
  c.recall_min = j.value("recall_min", d.recall_min);
  c.max_depth = j.value("max_depth", d.max_depth);
  c.n_estimators = j.value("n_estimators", d.n_estimators);
  c.max_samples = j.value("max_samples", d.max_samples);
  c.seed = j.value("seed", d.seed);
}

std::vector<std::size_t> activating_subset(const DenseMatrix& codes,
                                           std::size_t j, double t) {
  if (j < 1 || j > codes.cols()) {
    throw ValidationError("dictionary feature " + std::to_string(j) +
                          " outside 1.." + std::to_string(codes.cols()));
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < codes.rows(); ++i)
    if (codes(i, j - 1) > t) rows.push_back(i);
  return rows;
}

std::vector<Rule> mine_candidate_rules(const DenseMatrix& raw,
                                       std::span<const int> positives,
                                       const FeatureSchema& schema,
                                       const RuleMinerConfig& config, Rng& rng,
                                       const SortedColumns* presorted) {
  config.validate();
  if (positives.size() != raw.rows())
    throw DimensionError("mine_candidate_rules: label count differs from rows");
  if (schema.n_features() != raw.cols())
    throw DimensionError("mine_candidate_rules: schema width differs from data");
  std::size_t n_pos = 0;
  for (int p : positives) {
    if (p != 0 && p != 1) throw ValidationError("positives must be 0 or 1");
    n_pos += p;
  }
  if (n_pos == 0 || raw.rows() == 0) return {};

  SortedColumns local;
  if (presorted == nullptr) {
    local = presort(raw);
    presorted = &local;
  }

  TreeConfig tree_cfg;
  tree_cfg.max_depth = config.max_depth;
  std::set<std::vector<Condition>, decltype(&conditions_less)> seen(
      &conditions_less);
  for (std::size_t e = 0; e < config.n_estimators; ++e) {
    const auto rows = subsample(raw.rows(), config.max_samples, rng);
    const DecisionTree tree =
        DecisionTree::fit(raw, positives, rows, tree_cfg, presorted);
    for (const LeafPath& path : tree.leaf_paths()) {
      const TreeNode& leaf = tree.nodes()[path.leaf];
      if (leaf.counts[1] <= leaf.counts[0]) continue;
      std::vector<Condition> conds = canonical_conditions(path.steps, schema);
      if (conds.empty()) {
        // Pure root: the whole sample is positive. Bound by the column max
        // so the rule still has one condition and covers every row.
        double hi = raw(0, 0);
        for (std::size_t r = 1; r < raw.rows(); ++r) hi = std::max(hi, raw(r, 0));
        conds.push_back({0, schema.features[0].display_name(),
                         Comparator::kLessEqual, hi});
      }
      seen.insert(std::move(conds));
    }
  }

  std::vector<Rule> out;
  for (const auto& conds : seen) {
    Rule rule;
    rule.conditions = conds;
    const RuleStats st = evaluate_rule(rule, raw, positives);
    if (st.precision < config.precision_min || st.recall < config.recall_min)
      continue;
    rule.precision = st.precision;
    rule.recall = st.recall;
    rule.support = st.support;
    out.push_back(std::move(rule));
  }
  return out;
}

std::optional<Rule> select_rule(std::span<const Rule> candidates) {
  const Rule* best = nullptr;
  for (const Rule& r : candidates) {
    if (best == nullptr || r.recall > best->recall ||
        (r.recall == best->recall &&
         (r.conditions.size() < best->conditions.size() ||
          (r.conditions.size() == best->conditions.size() &&
           conditions_less(r.conditions, best->conditions))))) {
      best = &r;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

std::vector<DictionaryFeature> build_dictionary(const XnnTabModel& model,
                                                const TabularDataset& train,
                                                const RuleMinerConfig& config) {
  config.validate();
  if (model.stage != Stage::kMerged)
    throw StateError("rules need a merged model, stage is " + stage_name(model.stage));
  if (train.features.cols() != model.schema.n_features())
    throw DimensionError("training data does not match the model schema");
  const DenseMatrix codes =
      sae_encode(model.sae, collect_activations(model.body, train.features));
  const SortedColumns sorted = presort(train.raw);
  const std::size_t d_hid = codes.cols();
  std::vector<DictionaryFeature> dict(d_hid);
  std::exception_ptr failure;

#ifdef XNNTAB_USE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t jj = 0; jj < d_hid; ++jj) {
    try {
      const std::size_t j = jj + 1;
      DictionaryFeature& entry = dict[jj];
      entry.j = j;
      const auto t_rows = activating_subset(codes, j, config.threshold);
      entry.t_size = t_rows.size();
      if (t_rows.empty()) continue;
      std::vector<int> positives(train.size(), 0);
      for (std::size_t r : t_rows) positives[r] = 1;
      Rng rng = derive_rng(config.seed, j);
      const auto candidates = mine_candidate_rules(
          train.raw, positives, model.schema, config, rng, &sorted);
      entry.rule = select_rule(candidates);
    } catch (...) {
#ifdef XNNTAB_USE_OPENMP
#pragma omp critical
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return dict;
}

void to_json(nlohmann::json& j, const Rule& rule) {
  nlohmann::json conds = nlohmann::json::array();
  for (const Condition& c : rule.conditions) {
    conds.push_back({{"feature", c.name},
                     {"index", c.feature},
                     {"op", comparator_symbol(c.op)},
                     {"threshold", c.threshold}});
  }
  j = {{"conditions", std::move(conds)},
       {"text", rule.to_string()},
       {"precision", rule.precision},
       {"recall", rule.recall},
       {"support", rule.support}};
}

void from_json(const nlohmann::json& j, Rule& rule) {
  rule.conditions.clear();
  for (const auto& c : j.at("conditions")) {
    Condition cond;
    cond.name = c.at("feature").get<std::string>();
    cond.feature = c.at("index").get<std::size_t>();
    cond.op = parse_comparator(c.at("op").get<std::string>());
    cond.threshold = c.at("threshold").get<double>();
    rule.conditions.push_back(std::move(cond));
  }
  rule.precision = j.at("precision").get<double>();
  rule.recall = j.at("recall").get<double>();
  rule.support = j.at("support").get<std::size_t>();
}

nlohmann::json dictionary_to_json(std::span<const DictionaryFeature> dictionary) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : dictionary) {
    out.push_back({{"j", f.j},
                   {"T_size", f.t_size},
                   {"rule", f.rule ? nlohmann::json(*f.rule) : nlohmann::json()}});
  }
  return out;
}

std::vector<DictionaryFeature> dictionary_from_json(const nlohmann::json& j,
                                                    const FeatureSchema& schema) {
  std::vector<DictionaryFeature> out;
  std::set<std::size_t> ids;
  for (const auto& e : j) {
    DictionaryFeature f;
    f.j = e.at("j").get<std::size_t>();
    if (!ids.insert(f.j).second)
      throw SchemaError("dictionary lists feature " + std::to_string(f.j) + " twice");
    f.t_size = e.at("T_size").get<std::size_t>();
    if (!e.at("rule").is_null()) {
      Rule r = e.at("rule").get<Rule>();
      for (Condition& c : r.conditions) {
        if (c.feature >= schema.n_features() ||
            schema.features[c.feature].display_name() != c.name) {
          throw SchemaError("dictionary rule uses unknown feature '" + c.name + "'");
        }
      }
      f.rule = std::move(r);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string render_dictionary_table(std::span<const DictionaryFeature> dictionary,
                                    bool include_rule_less) {
  std::vector<const DictionaryFeature*> rows;
  for (const auto& f : dictionary)
    if (f.rule || include_rule_less) rows.push_back(&f);
  std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
    return a->t_size != b->t_size ? a->t_size > b->t_size : a->j < b->j;
  });
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"j", "|T_j|", "Description", "Coverage"});
  for (const auto* f : rows) {
    std::ostringstream cov;
    std::string desc = "(no rule)";
    if (f->rule) {
      desc = f->rule->to_string();
      cov << f->rule->support << " / ";
      cov.setf(std::ios::fixed);
      cov.precision(2);
      cov << f->rule->recall;
    }
    cells.push_back({std::to_string(f->j), std::to_string(f->t_size), desc, cov.str()});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  auto line = [&](const std::array<std::string, 4>& row) {
    out << std::string(width[0] - row[0].size(), ' ') << row[0] << "  "
        << std::string(width[1] - row[1].size(), ' ') << row[1] << "  " << row[2]
        << std::string(width[2] - row[2].size(), ' ') << "  " << row[3] << '\n';
  };
  line(cells[0]);
  out << std::string(width[0] + width[1] + width[2] + width[3] + 6, '-') << '\n';
  for (std::size_t i = 1; i < cells.size(); ++i) line(cells[i]);
  return out.str();
}

}  // namespace xnntab
