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

#include "xnntab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/metrics.hpp"
#include "xnntab/ops.hpp"
#include "xnntab/trainer.hpp"

namespace xnntab {

namespace {

std::vector<int> run_fold(ModelKind kind, const EvalConfig& config,
                          const TabularDataset& train,
                          const TabularDataset& validation,
                          const TabularDataset& test, std::uint64_t seed,
                          std::optional<XnnTabModel>& model_out) {
  switch (kind) {
    case ModelKind::kXnnTab: {
      model_out = train_xnntab(config.xnntab, train, validation, seed);
      return predict(*model_out, test.features).classes;
    }
    case ModelKind::kMlp: {
      // Same generator seeding as stage 1 of the full pipeline, so this is
      // the network XNNTab starts from.
      Rng rng(seed);
      const auto [body, head] = train_mlp(config.xnntab.mlp, train, validation, rng);
      Rng unused(0);
      return argmax_rows(
          head_logits(head, forward_hidden(body, test.features, false, unused)));
    }
    case ModelKind::kLogReg:
      return logreg_predict(train_logreg(train, validation, config.logreg),
                            test.features);
    case ModelKind::kCart:
      return cart_predict(train_cart(train, validation, config.cart),
                          test.features);
  }
  throw ValidationError("unknown model kind");
}

std::string fmt(double mean, double std) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f +- %.3f", mean, std);
  return buf;
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kXnnTab: return "xnntab";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kLogReg: return "logreg";
    case ModelKind::kCart: return "cart";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind k : {ModelKind::kXnnTab, ModelKind::kMlp, ModelKind::kLogReg,
                      ModelKind::kCart})
    if (model_kind_name(k) == name) return k;
  throw ValidationError("unknown model '" + name +
                        "' (expected xnntab, mlp, logreg or cart)");
}

EvalConfig EvalConfig::for_dataset(const std::string& name) {
  EvalConfig c;
  c.xnntab = XnnTabConfig::for_dataset(name);
  return c;
}

nlohmann::json EvalConfig::relevant(ModelKind kind) const {
  nlohmann::json j;
  j["model"] = model_kind_name(kind);
  switch (kind) {
    case ModelKind::kXnnTab: j["config"] = xnntab; break;
    case ModelKind::kMlp: j["config"] = nlohmann::json(xnntab)["mlp"]; break;
    case ModelKind::kLogReg: j["config"] = logreg; break;
    case ModelKind::kCart: j["config"] = cart; break;
  }
  return j;
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("summarize: no values");
  Summary s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  // Rounding can push the mean a hair outside the observed range.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

void to_json(nlohmann::json& j, const MetricReport& r) {
  auto summary = [](const Summary& s) {
    return nlohmann::json{{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
  };
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldMetrics& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"accuracy", f.accuracy},
                     {"macro_f1", f.macro_f1},
                     {"n_train", f.n_train},
                     {"n_validation", f.n_validation},
                     {"n_test", f.n_test}});
  }
  j = {{"dataset", r.dataset},
       {"model", r.model},
       {"seed", r.seed},
       {"config_hash", r.config_hash},
       {"folds", folds},
       {"accuracy", summary(r.accuracy)},
       {"macro_f1", summary(r.macro_f1)},
       {"conventions",
        {{"std", "population (divide by number of folds)"},
         {"macro_f1", "a class with no predictions and no true instances scores 0"}}}};
}

void from_json(const nlohmann::json& j, MetricReport& r) {
  auto summary = [](const nlohmann::json& s) {
    return Summary{s.at("mean").get<double>(), s.at("std").get<double>(),
                   s.at("min").get<double>(), s.at("max").get<double>()};
  };
  r.dataset = j.at("dataset").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.folds.clear();
  for (const auto& f : j.at("folds")) {
    r.folds.push_back({f.at("fold").get<std::size_t>(), f.at("accuracy").get<double>(),
                       f.at("macro_f1").get<double>(), f.at("n_train").get<std::size_t>(),
                       f.at("n_validation").get<std::size_t>(),
                       f.at("n_test").get<std::size_t>()});
  }
  r.accuracy = summary(j.at("accuracy"));
  r.macro_f1 = summary(j.at("macro_f1"));
}

std::string report_json_text(const MetricReport& report) {
  return nlohmann::json(report).dump(2) + "\n";
}

void check_fold_disjoint(const FoldSplit& split, std::size_t n) {
  std::vector<char> role(n, 0);
  auto mark = [&](const std::vector<std::size_t>& rows, char tag, const char* what) {
    for (std::size_t r : rows) {
      if (r >= n) throw ValidationError(std::string(what) + " row index out of range");
      if (role[r] != 0)
        throw ValidationError("row " + std::to_string(r) + " appears in more than one split");
      role[r] = tag;
    }
  };
  mark(split.train, 1, "training");
  mark(split.validation, 2, "validation");
  mark(split.test, 3, "test");
}

MetricReport run_cv(const TabularDataset& dataset, ModelKind kind,
                    const EvalConfig& config, std::uint64_t seed,
                    const FoldHook& hook) {
  switch (kind) {
    case ModelKind::kXnnTab: config.xnntab.validate(); break;
    case ModelKind::kMlp: config.xnntab.mlp.validate(); break;
    case ModelKind::kLogReg: config.logreg.validate(); break;
    case ModelKind::kCart: config.cart.validate(); break;
  }
  const auto splits = make_folds(dataset.size(), seed);

  std::vector<FoldMetrics> results(kNumFolds);
  std::vector<std::exception_ptr> errors(kNumFolds);

  const int n_folds = static_cast<int>(kNumFolds);
#ifdef XNNTAB_USE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (config.parallel_folds)
#endif
  for (int k = 0; k < n_folds; ++k) {
    try {
      const FoldSplit& split = splits[k];
      check_fold_disjoint(split, dataset.size());
      const FeatureSchema schema = fit_normalization(dataset, split.train);
      const TabularDataset norm = renormalized(dataset, schema);
      const TabularDataset train = subset(norm, split.train);
      const TabularDataset validation = subset(norm, split.validation);
      const TabularDataset test = subset(norm, split.test);
      std::optional<XnnTabModel> model;
      const std::vector<int> pred =
          run_fold(kind, config, train, validation, test, seed, model);
      results[k] = {static_cast<std::size_t>(k), accuracy(pred, test.labels),
                    macro_f1(pred, test.labels), train.size(), validation.size(),
                    test.size()};
      if (hook) {
        FoldContext ctx{&split, &train, &validation, &test,
                        model ? &*model : nullptr, &pred};
        hook(ctx);
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (std::size_t k = 0; k < kNumFolds; ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const std::exception& e) {
      throw FoldError(k, e.what());
    }
  }

  MetricReport report;
  report.dataset = dataset.name;
  report.model = model_kind_name(kind);
  report.seed = seed;
  report.config_hash = detail::hex64(detail::fnv1a(config.relevant(kind).dump()));
  report.folds = results;
  std::vector<double> acc, f1;
  for (const FoldMetrics& f : results) {
    acc.push_back(f.accuracy);
    f1.push_back(f.macro_f1);
  }
  report.accuracy = summarize(acc);
  report.macro_f1 = summarize(f1);
  return report;
}

const std::vector<ReferenceRow>& reference_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"Random Forest", "adult", 0.717, 0.003, 0.806, 0.002},
      {"Random Forest", "churn", 0.738, 0.002, 0.857, 0.001},
      {"XGBoost", "adult", 0.750, 0.006, 0.843, 0.003},
      {"XGBoost", "churn", 0.730, 0.000, 0.854, 0.000},
  };
  return rows;
}

std::string render_table(const std::vector<MetricReport>& reports) {
  struct Cell {
    std::string f1 = "-", acc = "-";
  };
  // label -> dataset -> cell
  std::vector<std::pair<std::string, std::map<std::string, Cell>>> rows;
  auto row = [&](const std::string& label) -> std::map<std::string, Cell>& {
    for (auto& r : rows)
      if (r.first == label) return r.second;
    rows.emplace_back(label, std::map<std::string, Cell>{});
    return rows.back().second;
  };
  for (const auto& ref : reference_rows()) {
    row(std::string(ref.model) + " (published)")[ref.dataset] = {
        fmt(ref.f1_mean, ref.f1_std), fmt(ref.acc_mean, ref.acc_std)};
  }
  const std::pair<const char*, const char*> order[] = {
      {"mlp", "MLP"}, {"logreg", "Logistic Regression"},
      {"cart", "Decision Tree"}, {"xnntab", "XNNTab"}};
  for (const auto& [key, label] : order) {
    for (const MetricReport& r : reports) {
      if (r.model != key) continue;
      row(label)[r.dataset] = {fmt(r.macro_f1.mean, r.macro_f1.std),
                               fmt(r.accuracy.mean, r.accuracy.std)};
    }
  }

  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-15s %-15s %-15s %-15s\n", "",
                "adult F1-macro", "adult Acc", "churn F1-macro", "churn Acc");
  out << line;
  for (const auto& [label, cells] : rows) {
    auto get = [&](const char* ds) {
      auto it = cells.find(ds);
      return it == cells.end() ? Cell{} : it->second;
    };
    const Cell a = get("adult"), c = get("churn");
    std::snprintf(line, sizeof line, "%-28s %-15s %-15s %-15s %-15s\n", label.c_str(),
                  a.f1.c_str(), a.acc.c_str(), c.f1.c_str(), c.acc.c_str());
    out << line;
  }
  out << "mean +- population std over 5 folds; rows marked (published) were "
         "not run here.\n"
         "Logistic regression is unregularized (l2 = 0 unless configured).\n";
  return out.str();
}

}  // namespace xnntab
