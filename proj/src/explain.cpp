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

#include "xnntab/explain.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "xnntab/errors.hpp"
#include "xnntab/trainer.hpp"

namespace xnntab {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

const MergedHead& merged_head(const XnnTabModel& model) {
  if (model.stage != Stage::kMerged || !model.merged)
    throw StateError("explanations need a merged model, stage is " +
                     stage_name(model.stage));
  return *model.merged;
}

std::vector<std::string> rule_texts(std::span<const DictionaryFeature> dictionary,
                                    std::size_t d_hid) {
  std::vector<std::string> text(d_hid, kNoRule);
  for (const auto& f : dictionary) {
    if (f.j < 1 || f.j > d_hid)
      throw ValidationError("dictionary feature " + std::to_string(f.j) +
                            " outside 1.." + std::to_string(d_hid));
    if (f.rule) text[f.j - 1] = f.rule->to_string();
  }
  return text;
}

std::vector<std::string> class_names_of(const XnnTabModel& model) {
  return {model.schema.class_names.begin(), model.schema.class_names.end()};
}

// Right-aligned columns except those flagged left.
std::string render_table(const std::vector<std::vector<std::string>>& rows,
                         const std::vector<bool>& left,
                         const std::vector<std::size_t>& rules_after = {}) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const std::string& cell = rows[i][c];
      const std::string pad(width[c] - cell.size(), ' ');
      line += c < left.size() && left[c] ? cell + pad : pad + cell;
      if (c + 1 < rows[i].size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
    if (std::find(rules_after.begin(), rules_after.end(), i) != rules_after.end())
      out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
  }
  return out.str();
}

}  // namespace

LocalExplanation explain_local(const XnnTabModel& model,
                               std::span<const DictionaryFeature> dictionary,
                               const DenseMatrix& raw_row) {
  const MergedHead& head = merged_head(model);
  const FeatureSchema& schema = model.schema;
  if (raw_row.rows() != 1 || raw_row.cols() != schema.n_features()) {
    throw ValidationError("instance " + raw_row.shape_string() +
                          " does not match the schema's " +
                          std::to_string(schema.n_features()) + " features");
  }
  if (!raw_row.all_finite()) throw ValidationError("instance has non-finite values");
  const DenseMatrix x = apply_normalization(schema, raw_row);
  const Prediction p = predict(model, x);
  const std::size_t d_hid = model.sae.d_hid();
  const std::size_t n_classes = head.weight.rows();
  const auto texts = rule_texts(dictionary, d_hid);

  LocalExplanation e;
  for (const auto& f : schema.features) e.feature_names.push_back(f.display_name());
  e.raw.assign(raw_row.values().begin(), raw_row.values().end());
  e.class_names = class_names_of(model);
  e.logits.assign(n_classes, 0.0);
  for (std::size_t j = 0; j < d_hid; ++j) {
    const double c = p.codes(0, j);
    if (!(c > 0.0)) continue;
    ActiveFeature a;
    a.j = j + 1;
    a.rule = texts[j];
    a.activation = c;
    for (std::size_t k = 0; k < n_classes; ++k) {
      a.weights.push_back(head.weight(k, j));
      a.contributions.push_back(c * head.weight(k, j));
      e.logits[k] += a.contributions.back();
    }
    e.active.push_back(std::move(a));
  }
  e.predicted = p.classes[0];
  return e;
}

GlobalExplanation explain_global(const XnnTabModel& model,
                                 std::span<const DictionaryFeature> dictionary) {
  const MergedHead& head = merged_head(model);
  GlobalExplanation g;
  g.weights = head.weight;
  g.annotations = rule_texts(dictionary, head.weight.cols());
  g.class_names = class_names_of(model);
  return g;
}

ComplexityStats complexity_stats(const XnnTabModel& model,
                                 std::span<const DictionaryFeature> dictionary,
                                 const DenseMatrix& features) {
  merged_head(model);
  const std::size_t d_hid = model.sae.d_hid();
  rule_texts(dictionary, d_hid);
  ComplexityStats s;

  double len_sum = 0.0;
  s.rule_length.min = std::numeric_limits<double>::infinity();
  s.rule_length.max = 0.0;
  for (const auto& f : dictionary) {
    if (!f.rule) continue;
    const double len = static_cast<double>(f.rule->conditions.size());
    ++s.n_rules;
    len_sum += len;
    s.rule_length.min = std::min(s.rule_length.min, len);
    s.rule_length.max = std::max(s.rule_length.max, len);
  }
  if (s.n_rules) {
    s.rule_length.avg = len_sum / static_cast<double>(s.n_rules);
  } else {
    s.rule_length.min = 0.0;
  }

  const Prediction p = predict(model, features);
  s.n_instances = features.rows();
  double act_sum = 0.0;
  s.active_features.min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.codes.rows(); ++i) {
    double n = 0.0;
    for (double c : p.codes.row(i)) n += c > 0.0;
    act_sum += n;
    s.active_features.min = std::min(s.active_features.min, n);
    s.active_features.max = std::max(s.active_features.max, n);
  }
  if (s.n_instances) {
    s.active_features.avg = act_sum / static_cast<double>(s.n_instances);
  } else {
    s.active_features.min = 0.0;
  }
  return s;
}

std::string render_local(const LocalExplanation& e) {
  std::ostringstream out;
  {
    std::vector<std::string> names = {"Dataset features"};
    std::vector<std::string> values = {"Raw instance"};
    for (std::size_t f = 0; f < e.feature_names.size(); ++f) {
      names.push_back(e.feature_names[f]);
      values.push_back(format_number(e.raw[f]));
    }
    out << render_table({names, values}, {true}) << '\n';
  }
  const std::size_t k_n = e.logits.size();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"j", "rule", "c_j"};
  for (std::size_t k = 0; k < k_n; ++k) {
    header.push_back("W'_j," + std::to_string(k));
    header.push_back("c_j*W'_j," + std::to_string(k));
  }
  rows.push_back(header);
  for (const auto& a : e.active) {
    std::vector<std::string> r = {std::to_string(a.j), a.rule, fixed(a.activation, 4)};
    for (std::size_t k = 0; k < k_n; ++k) {
      r.push_back(fixed(a.weights[k], 4));
      r.push_back(fixed(a.contributions[k], 4));
    }
    rows.push_back(std::move(r));
  }
  std::vector<std::string> logits = {"Output logits", "", ""};
  std::vector<std::string> cls = {"Class", "", ""};
  for (std::size_t k = 0; k < k_n; ++k) {
    logits.push_back("");
    logits.push_back(fixed(e.logits[k], 3));
    cls.push_back("");
    cls.push_back(static_cast<int>(k) == e.predicted ? "[" + e.class_names[k] + "]"
                                                     : e.class_names[k]);
  }
  rows.push_back(std::move(logits));
  rows.push_back(std::move(cls));
  const std::size_t last_feature = rows.size() - 3;
  out << render_table(rows, {false, true}, {0, last_feature, last_feature + 1});
  out << "Predicted: " << e.class_names[e.predicted] << '\n';
  return out.str();
}

std::string render_global(const GlobalExplanation& g) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"j", "rule"};
  for (const auto& c : g.class_names) header.push_back("W' " + c);
  rows.push_back(header);
  for (std::size_t j = 0; j < g.weights.cols(); ++j) {
    std::vector<std::string> r = {std::to_string(j + 1), g.annotations[j]};
    for (std::size_t k = 0; k < g.weights.rows(); ++k)
      r.push_back(fixed(g.weights(k, j), 4));
    rows.push_back(std::move(r));
  }
  return render_table(rows, {false, true}, {0});
}

std::string render_complexity(const ComplexityStats& s) {
  std::vector<std::vector<std::string>> rows = {
      {"", "min", "avg", "max"},
      {"Rule length", fixed(s.rule_length.min, 0), fixed(s.rule_length.avg, 1),
       fixed(s.rule_length.max, 0)},
      {"Active features", fixed(s.active_features.min, 0),
       fixed(s.active_features.avg, 1), fixed(s.active_features.max, 0)}};
  return render_table(rows, {true}, {0});
}

std::string heatmap_csv(const GlobalExplanation& g) {
  std::ostringstream out;
  out << "class";
  for (std::size_t j = 0; j < g.weights.cols(); ++j) out << ",j" << j + 1;
  out << '\n';
  for (std::size_t k = 0; k < g.weights.rows(); ++k) {
    out << g.class_names.at(k);
    for (std::size_t j = 0; j < g.weights.cols(); ++j)
      out << ',' << format_number(g.weights(k, j));
    out << '\n';
  }
  return out.str();
}

void to_json(nlohmann::json& j, const LocalExplanation& e) {
  nlohmann::json active = nlohmann::json::array();
  for (const auto& a : e.active) {
    active.push_back({{"j", a.j},
                      {"rule", a.rule},
                      {"activation", a.activation},
                      {"weights", a.weights},
                      {"contributions", a.contributions}});
  }
  nlohmann::json instance = nlohmann::json::object();
  for (std::size_t f = 0; f < e.feature_names.size(); ++f)
    instance[e.feature_names[f]] = e.raw[f];
  j = {{"instance", instance},
       {"active", std::move(active)},
       {"logits", e.logits},
       {"predicted", e.predicted},
       {"predicted_label", e.class_names.at(e.predicted)},
       {"class_names", e.class_names}};
}

void to_json(nlohmann::json& j, const GlobalExplanation& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < g.weights.rows(); ++k) {
    const auto r = g.weights.row(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j = {{"class_names", g.class_names},
       {"annotations", g.annotations},
       {"weights", std::move(rows)}};
}

void to_json(nlohmann::json& j, const ComplexityStats& s) {
  auto range = [](const StatRange& r) {
    return nlohmann::json{{"min", r.min}, {"avg", r.avg}, {"max", r.max}};
  };
  j = {{"rule_length", range(s.rule_length)},
       {"active_features", range(s.active_features)},
       {"n_rules", s.n_rules},
       {"n_instances", s.n_instances}};
}

}  // namespace xnntab
