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

#include "xnntab/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "xnntab/baselines.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/explain.hpp"
#include "xnntab/metrics.hpp"
#include "xnntab/serialization.hpp"
#include "xnntab/trainer.hpp"

namespace xnntab::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModelFile = "model.xnnt";
constexpr const char* kDictionaryFile = "dictionary.json";
constexpr const char* kRunFile = "run.json";
constexpr const char* kLossFile = "losses.csv";

struct Flags {
  std::optional<std::string> dataset;
  std::optional<std::string> data_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::string out = "out";
  std::optional<std::size_t> fold;
  std::optional<std::string> config;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> sae_epochs;
  std::optional<double> lr;
  std::optional<double> sae_lr;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<std::size_t> expansion;
  std::optional<double> threshold;
  std::optional<std::string> artifact;
  std::optional<std::string> dictionary;
  std::optional<std::string> instance;
  bool global = false;
};

nlohmann::json read_json_file(const fs::path& path, const std::string& hint = "") {
  if (!fs::exists(path)) throw MissingFileError(path, hint);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Precedence: dataset defaults < `base` (e.g. a previous run) < --config
// file < explicit flags.
RunConfig resolve_flags(const Flags& f, nlohmann::json base = nlohmann::json::object()) {
  if (f.config) base.merge_patch(read_json_file(*f.config));
  nlohmann::json o = nlohmann::json::object();
  if (f.dataset) o["dataset"] = *f.dataset;
  if (f.data_path) o["data_path"] = *f.data_path;
  if (f.seed) o["seed"] = *f.seed;
  if (f.fold) o["fold"] = *f.fold;
  if (f.model) o["model"] = *f.model;
  if (f.epochs) o["xnntab"]["mlp"]["epochs"] = *f.epochs;
  if (f.lr) o["xnntab"]["mlp"]["lr"] = *f.lr;
  if (f.lambda) o["xnntab"]["mlp"]["l1"] = *f.lambda;
  if (f.sae_epochs) o["xnntab"]["sae"]["epochs"] = *f.sae_epochs;
  if (f.sae_lr) o["xnntab"]["sae"]["lr"] = *f.sae_lr;
  if (f.alpha) o["xnntab"]["sae"]["alpha"] = *f.alpha;
  if (f.expansion) o["xnntab"]["sae"]["expansion"] = *f.expansion;
  if (f.threshold) o["rules"]["threshold"] = *f.threshold;
  base.merge_patch(o);
  const std::string dataset = base.value("dataset", std::string("adult"));
  RunConfig rc = RunConfig::resolve(dataset, base);
  rc.out = f.out;
  return rc;
}

struct FoldData {
  TabularDataset train, validation, test;
};

FoldData fold_data(const TabularDataset& all, const RunConfig& rc,
                   const FeatureSchema* schema) {
  if (rc.fold >= kNumFolds)
    throw ValidationError("--fold must be in [0, " + std::to_string(kNumFolds - 1) + "]");
  const FoldSplit split = make_folds(all.size(), rc.seed)[rc.fold];
  check_fold_disjoint(split, all.size());
  const TabularDataset norm =
      renormalized(all, schema ? *schema : fit_normalization(all, split.train));
  return {subset(norm, split.train), subset(norm, split.validation),
          subset(norm, split.test)};
}

std::string metrics_line(const std::vector<int>& pred, const Labels& labels) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "accuracy %.4f  macro-F1 %.4f",
                accuracy(pred, labels), macro_f1(pred, labels));
  return buf;
}

// Previous run settings stored next to the artifacts, if any.
nlohmann::json previous_run(const fs::path& dir) {
  const fs::path p = dir / kRunFile;
  if (!fs::exists(p)) return nlohmann::json::object();
  nlohmann::json j = read_json_file(p);
  return j.contains("config") ? j["config"] : nlohmann::json::object();
}

int cmd_prepare(const Flags& f, std::ostream& out) {
  const RunConfig rc = resolve_flags(f);
  const TabularDataset ds = load_input(rc.dataset, rc.data_path);
  DirectoryLock lock(rc.out);
  write_cache(ds, rc.out);
  std::size_t positives = 0;
  for (int y : ds.labels) positives += y == 1;
  out << ds.name << ": " << ds.schema.n_features() << " features, " << ds.size()
      << " rows (" << positives << " positive)\n";
  for (const FeatureDescriptor& fd : ds.schema.features) {
    out << "  " << fd.name << (fd.kind == FeatureKind::kBinary ? "  binary" : "") << "  [" << fd.min
        << ", " << fd.max << "]\n";
  }
  out << "cache written to " << rc.out.string() << "\n";
  return kOk;
}

int cmd_train(const Flags& f, std::ostream& out) {
  RunConfig rc = resolve_flags(f);
  const ModelKind kind = parse_model_kind(rc.model);
  const TabularDataset all = load_input(rc.dataset, rc.data_path);
  const FoldData d = fold_data(all, rc, nullptr);
  DirectoryLock lock(rc.out);

  nlohmann::json run = {{"config", rc.to_json()}};
  std::vector<int> pred;
  switch (kind) {
    case ModelKind::kXnnTab: {
      TrainingLog log;
      const XnnTabModel model = train_xnntab(rc.eval.xnntab, d.train, d.validation,
                                             rc.seed, &log);
      save_model(model, rc.out / kModelFile);
      log.write_csv(rc.out / kLossFile);
      // Last record per stage, in stage order.
      std::vector<const EpochRecord*> last;
      for (const EpochRecord& r : log.records) {
        if (last.empty() || last.back()->stage != r.stage) last.push_back(&r);
        else last.back() = &r;
      }
      for (const EpochRecord* r : last) {
        out << "stage " << r->stage << ": " << r->epoch << " epochs, final loss "
            << r->train_loss << "\n";
      }
      out << "model stage: " << stage_name(model.stage) << "\n";
      pred = predict(model, d.test.features).classes;
      out << "wrote " << (rc.out / kModelFile).string() << ", "
          << (rc.out / kLossFile).string() << "\n";
      break;
    }
    case ModelKind::kLogReg: {
      const LogisticModel m = train_logreg(d.train, d.validation, rc.eval.logreg);
      save_logreg(m, d.train.schema, rc.out / "logreg.json");
      pred = logreg_predict(m, d.test.features);
      out << "logistic regression: " << m.iterations << " iterations (budget "
          << m.max_iter << "), gradient norm " << m.gradient_norm << "\n";
      break;
    }
    case ModelKind::kCart: {
      const CartModel m = train_cart(d.train, d.validation, rc.eval.cart);
      save_cart(m, d.train.schema, rc.out / "cart.json");
      pred = cart_predict(m, d.test.features);
      out << "decision tree: depth " << m.max_depth << ", " << m.tree.n_leaves()
          << " leaves\n";
      break;
    }
    case ModelKind::kMlp:
      throw ValidationError("the MLP baseline is evaluated with 'eval --model mlp' only");
  }
  run["test"] = {{"accuracy", accuracy(pred, d.test.labels)},
                 {"macro_f1", macro_f1(pred, d.test.labels)},
                 {"n", d.test.size()}};
  write_text(rc.out / kRunFile, run.dump(2) + "\n");
  out << "fold " << rc.fold << " test: " << metrics_line(pred, d.test.labels) << "\n";
  return kOk;
}

fs::path model_path(const Flags& f) {
  const fs::path p = f.artifact ? fs::path(*f.artifact) : fs::path(f.out) / kModelFile;
  if (!fs::exists(p)) throw MissingFileError(p, "run 'train' first");
  return p;
}

int cmd_rules(const Flags& f, std::ostream& out) {
  const fs::path mp = model_path(f);
  const RunConfig rc = resolve_flags(f, previous_run(mp.parent_path()));
  const XnnTabModel model = load_model(mp);
  if (model.schema.dataset != rc.dataset)
    throw SchemaError("model was trained on '" + model.schema.dataset +
                      "', not '" + rc.dataset + "'");
  const TabularDataset all = load_input(rc.dataset, rc.data_path);
  const FoldData d = fold_data(all, rc, &model.schema);
  DirectoryLock lock(rc.out);
  const auto dict = build_dictionary(model, d.train, rc.rules);
  write_text(rc.out / kDictionaryFile, dictionary_to_json(dict).dump(2) + "\n");
  out << render_dictionary_table(dict, true);
  out << render_complexity(complexity_stats(model, dict, d.test.features));
  out << "wrote " << (rc.out / kDictionaryFile).string() << "\n";
  return kOk;
}

int cmd_explain(const Flags& f, std::ostream& out) {
  const fs::path mp = model_path(f);
  const fs::path dp = f.dictionary ? fs::path(*f.dictionary)
                                   : mp.parent_path() / kDictionaryFile;
  const XnnTabModel model = load_model(mp);
  const auto dict = dictionary_from_json(read_json_file(dp, "run 'rules' first"),
                                         model.schema);
  if (!f.instance && !f.global)
    throw ValidationError("explain needs --instance and/or --global");
  std::optional<DirectoryLock> lock;
  if (f.instance) {
    nlohmann::json record;
    const std::string& text = *f.instance;
    if (!text.empty() && text.front() == '@') {
      record = read_json_file(text.substr(1));
    } else {
      try {
        record = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("--instance is not valid JSON: ") + e.what());
      }
    }
    const LocalExplanation e = explain_local(model, dict, encode_record(model.schema, record));
    out << render_local(e);
    if (!lock) lock.emplace(f.out);
    write_text(fs::path(f.out) / "explanation.json", nlohmann::json(e).dump(2) + "\n");
  }
  if (f.global) {
    const GlobalExplanation g = explain_global(model, dict);
    out << render_global(g);
    if (!lock) lock.emplace(f.out);
    write_text(fs::path(f.out) / "global_heatmap.csv", heatmap_csv(g));
  }
  return kOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const RunConfig rc = resolve_flags(f);
  std::vector<ModelKind> kinds;
  if (rc.model == "all") {
    kinds = {ModelKind::kLogReg, ModelKind::kCart, ModelKind::kMlp, ModelKind::kXnnTab};
  } else {
    std::stringstream ss(rc.model);
    for (std::string name; std::getline(ss, name, ',');)
      kinds.push_back(parse_model_kind(name));
  }
  const TabularDataset all = load_input(rc.dataset, rc.data_path);
  DirectoryLock lock(rc.out);
  std::vector<MetricReport> reports;
  for (ModelKind kind : kinds) {
    MetricReport r = run_cv(all, kind, rc.eval, rc.seed);
    const fs::path p =
        rc.out / ("report_" + r.dataset + "_" + r.model + ".json");
    write_text(p, report_json_text(r));
    out << "wrote " << p.string() << "\n";
    reports.push_back(std::move(r));
  }
  const std::string table = render_table(reports);
  write_text(rc.out / ("table_" + rc.dataset + ".txt"), table);
  out << table;
  return kOk;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--dataset", f.dataset, "adult or churn");
  sub->add_option("--data-path", f.data_path,
                  "CSV file, data directory or prepared cache directory");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--out", f.out, "Output directory")->capture_default_str();
  sub->add_option("--fold", f.fold, "Cross-validation fold (0-4)");
  sub->add_option("--config", f.config, "JSON file overriding defaults");
  sub->add_option("--threshold", f.threshold, "Activation threshold t");
}

void add_training(CLI::App* sub, Flags& f) {
  sub->add_option("--model", f.model, "xnntab, logreg or cart");
  sub->add_option("--epochs", f.epochs, "MLP / decision layer epochs");
  sub->add_option("--sae-epochs", f.sae_epochs, "SAE epochs");
  sub->add_option("--lr", f.lr, "MLP / decision layer learning rate");
  sub->add_option("--sae-lr", f.sae_lr, "SAE learning rate");
  sub->add_option("--lambda", f.lambda, "L1 weight");
  sub->add_option("--alpha", f.alpha, "SAE sparsity weight");
  sub->add_option("--expansion", f.expansion, "SAE expansion factor R");
}

}  // namespace

RunConfig RunConfig::resolve(const std::string& dataset,
                             const nlohmann::json& overrides) {
  static const std::set<std::string> kKeys = {
      "dataset", "data_path", "seed", "fold", "model", "xnntab", "logreg", "cart", "rules"};
  if (!overrides.is_object()) throw ValidationError("configuration must be a JSON object");
  for (const auto& [key, value] : overrides.items())
    if (!kKeys.count(key)) throw ValidationError("unknown configuration key '" + key + "'");

  RunConfig rc;
  rc.dataset = dataset;
  rc.eval = EvalConfig::for_dataset(dataset);
  nlohmann::json j = rc.to_json();
  j.merge_patch(overrides);
  rc.dataset = j.at("dataset").get<std::string>();
  if (rc.dataset != dataset) throw ValidationError("dataset mismatch in configuration");
  rc.data_path = j.at("data_path").get<std::string>();
  rc.seed = j.at("seed").get<std::uint64_t>();
  rc.fold = j.at("fold").get<std::size_t>();
  rc.model = j.at("model").get<std::string>();
  rc.eval.xnntab = j.at("xnntab").get<XnnTabConfig>();
  rc.eval.logreg = j.at("logreg").get<LogRegConfig>();
  rc.eval.cart = j.at("cart").get<CartConfig>();
  rc.rules = j.at("rules").get<RuleMinerConfig>();
  rc.eval.xnntab.validate();
  rc.eval.logreg.validate();
  rc.eval.cart.validate();
  rc.rules.validate();
  return rc;
}

nlohmann::json RunConfig::to_json() const {
  return {{"dataset", dataset},     {"data_path", data_path.string()},
          {"seed", seed},           {"fold", fold},
          {"model", model},         {"xnntab", eval.xnntab},
          {"logreg", eval.logreg},  {"cart", eval.cart},
          {"rules", rules}};
}

std::string default_file_name(const std::string& dataset) {
  if (dataset == "adult") return "adult.csv";
  if (dataset == "churn") return "Churn_Modelling.csv";
  throw ValidationError("unknown dataset '" + dataset + "' (expected adult or churn)");
}

TabularDataset load_input(const std::string& dataset, const fs::path& data_path) {
  const std::string file = default_file_name(dataset);
  fs::path p = data_path;
  if (p.empty()) {
    const char* env = std::getenv(kDataDirEnv);
    p = (env && *env) ? fs::path(env) : fs::path("data");
  }
  if (fs::is_directory(p)) {
    if (fs::exists(p / (dataset + ".manifest.json"))) return read_cache(p, dataset);
    p /= file;
  }
  if (!fs::exists(p)) throw MissingFileError(p);
  return load_dataset(dataset, p);
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".xnntab.lock") {
  fs::create_directories(dir);
  std::FILE* fh = std::fopen(path_.string().c_str(), "wx");
  if (!fh) {
    throw LockedError("output directory '" + dir.string() +
                      "' is locked by another run (remove '" + path_.string() +
                      "' if stale)");
  }
  std::fclose(fh);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"XNNTab: sparse-autoencoder interpretable tabular classifier"};
  app.require_subcommand(1);
  Flags f;

  auto* prepare = app.add_subcommand("prepare", "Load a CSV and write the dataset cache");
  add_common(prepare, f);
  auto* train = app.add_subcommand("train", "Train all stages on one fold");
  add_common(train, f);
  add_training(train, f);
  auto* rules = app.add_subcommand("rules", "Mine rules for the dictionary features");
  add_common(rules, f);
  rules->add_option("--artifact", f.artifact, "Model file (default <out>/model.xnnt)");
  auto* explain = app.add_subcommand("explain", "Explain one instance or the whole model");
  explain->add_option("--out", f.out, "Output directory")->capture_default_str();
  explain->add_option("--artifact", f.artifact, "Model file (default <out>/model.xnnt)");
  explain->add_option("--dictionary", f.dictionary,
                      "Dictionary JSON (default next to the model)");
  explain->add_option("--instance", f.instance,
                      "JSON object keyed by raw feature name, or @file");
  explain->add_flag("--global", f.global, "Print the global explanation");
  auto* eval = app.add_subcommand("eval", "5-fold cross-validated evaluation");
  add_common(eval, f);
  add_training(eval, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*prepare) return cmd_prepare(f, out);
    if (*train) return cmd_train(f, out);
    if (*rules) return cmd_rules(f, out);
    if (*explain) return cmd_explain(f, out);
    if (*eval) return cmd_eval(f, out);
  } catch (const MissingFileError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingFile;
  } catch (const LockedError& e) {
    err << "error: " << e.what() << "\n";
    return kLocked;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace xnntab::cli
