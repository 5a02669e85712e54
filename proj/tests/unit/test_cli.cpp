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

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"
#include "xnntab/cli.hpp"
#include "xnntab/serialization.hpp"

using namespace xnntab;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "xnntab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("xnntab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Adult-layout CSV where income follows capital gain and education.
fs::path synthetic_adult(const fs::path& dir, std::size_t n) {
  const fs::path p = dir / "adult.csv";
  std::ofstream out(p);
  out << "age,workclass,fnlwgt,education,education-num,marital-status,occupation,"
         "relationship,race,sex,capital-gain,capital-loss,hours-per-week,"
         "native-country,income\n";
  std::mt19937_64 gen(42);
  for (std::size_t i = 0; i < n; ++i) {
    const int age = 17 + static_cast<int>(gen() % 60);
    const int edu = 1 + static_cast<int>(gen() % 16);
    const int cg = gen() % 5 == 0 ? static_cast<int>(gen() % 20000) : 0;
    const int hpw = 10 + static_cast<int>(gen() % 60);
    const bool rich = cg > 5000 || (edu > 12 && hpw > 45);
    out << age << ",Private," << 20000 + gen() % 300000 << ",X," << edu
        << ",M,O,R,W,Male," << cg << ",0," << hpw << ",US,"
        << (rich ? ">50K" : "<=50K") << "\n";
  }
  return p;
}

fs::path tiny_config(const fs::path& dir) {
  const fs::path p = dir / "tiny.json";
  std::ofstream(p) << R"({"xnntab": {"mlp": {"hidden": [8, 4], "dropout": [0, 0],
    "epochs": 4, "batch_size": 32, "lr": 0.01},
    "sae": {"epochs": 4, "batch_size": 32, "lr": 0.001}},
    "rules": {"threshold": 0.05, "n_estimators": 5}})";
  return p;
}

}  // namespace

TEST_CASE("cli: usage errors") {
  CHECK(run({}).code != 0);
  CHECK(run({"bogus"}).code != 0);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"train", "--help"}).out.find("--expansion") != std::string::npos);
}

TEST_CASE("cli: missing input exits 2 and names the path") {
  const Result r = run({"prepare", "--data-path", "/definitely/not/here.csv"});
  CHECK(r.code == cli::kMissingFile);
  CHECK(r.err.find("/definitely/not/here.csv") != std::string::npos);

  const fs::path dir = scratch("missing");
  const Result m = run({"rules", "--out", dir.string()});
  CHECK(m.code == cli::kMissingFile);
  CHECK(m.err.find("model.xnnt") != std::string::npos);
  CHECK(m.err.find("train") != std::string::npos);
}

TEST_CASE("cli: prepare writes a stable cache") {
  const fs::path dir = scratch("prepare");
  const Result r = run({"prepare", "--data-path", testing::fixture("adult_sample.csv").string(),
                        "--out", (dir / "c").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("adult: 6 features, 6 rows") != std::string::npos);
  const std::string first = slurp(dir / "c" / "adult.matrix.bin") +
                            slurp(dir / "c" / "adult.manifest.json");
  REQUIRE(run({"prepare", "--data-path", testing::fixture("adult_sample.csv").string(),
               "--out", (dir / "c").string()}).code == 0);
  CHECK(slurp(dir / "c" / "adult.matrix.bin") + slurp(dir / "c" / "adult.manifest.json") ==
        first);
  CHECK(!fs::exists(dir / "c" / ".xnntab.lock"));
}

TEST_CASE("cli: default data directory from the environment") {
  const fs::path dir = scratch("env");
  fs::copy_file(testing::fixture("adult_sample.csv"), dir / "adult.csv");
  ::setenv(cli::kDataDirEnv, dir.string().c_str(), 1);
  const Result r = run({"prepare", "--out", (dir / "c").string()});
  ::unsetenv(cli::kDataDirEnv);
  CHECK(r.code == 0);
  CHECK(r.out.find("6 rows") != std::string::npos);
}

TEST_CASE("cli: a held lock refuses a second writer") {
  const fs::path dir = scratch("lock");
  std::ofstream(dir / ".xnntab.lock") << "";
  const Result r = run({"prepare", "--data-path", testing::fixture("adult_sample.csv").string(),
                        "--out", dir.string()});
  CHECK(r.code == cli::kLocked);
  CHECK(r.err.find("locked") != std::string::npos);
}

TEST_CASE("cli: configuration resolution") {
  const cli::RunConfig a = cli::RunConfig::resolve("adult", nlohmann::json::object());
  CHECK(a.eval.xnntab.mlp.hidden == std::vector<std::size_t>{97, 30, 7});
  CHECK(a.eval.xnntab.sae.expansion == 3);
  CHECK(a.rules.threshold == 0.9);
  const cli::RunConfig c = cli::RunConfig::resolve(
      "churn", {{"xnntab", {{"sae", {{"alpha", 0.5}}}}}, {"seed", 9}});
  CHECK(c.eval.xnntab.mlp.hidden == std::vector<std::size_t>{63, 24});
  CHECK(c.eval.xnntab.sae.alpha == 0.5);
  CHECK(c.eval.xnntab.sae.expansion == 2);
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(cli::RunConfig::resolve("adult", {{"colour", 1}}), ValidationError);
  CHECK_THROWS_AS(cli::RunConfig::resolve("mnist", nlohmann::json::object()),
                  ValidationError);

  const fs::path dir = scratch("config");
  std::ofstream(dir / "bad.json") << R"({"colour": 1})";
  const Result r = run({"prepare", "--config", (dir / "bad.json").string()});
  CHECK(r.code == cli::kFailure);
  CHECK(r.err.find("colour") != std::string::npos);
}

TEST_CASE("cli: train, rules, explain, eval on synthetic Adult") {
  const fs::path dir = scratch("pipeline");
  const fs::path csv = synthetic_adult(dir, 400);
  const fs::path cfg = tiny_config(dir);
  const fs::path run_dir = dir / "run";

  const Result t = run({"train", "--data-path", csv.string(), "--config", cfg.string(),
                        "--out", run_dir.string(), "--seed", "3"});
  REQUIRE_MESSAGE(t.code == 0, t.err);
  CHECK(load_model(run_dir / "model.xnnt").stage == Stage::kMerged);
  const std::string losses = slurp(run_dir / "losses.csv");
  CHECK(losses.rfind("stage,epoch,train_loss,validation_metric\n", 0) == 0);
  CHECK(losses.find("\nsae,4,") != std::string::npos);
  const auto run_json = nlohmann::json::parse(slurp(run_dir / "run.json"));
  CHECK(run_json["config"]["seed"] == 3);
  CHECK(run_json["config"]["xnntab"]["mlp"]["epochs"] == 4);

  // Same seed, same artifact.
  const std::string model_bytes = slurp(run_dir / "model.xnnt");
  REQUIRE(run({"train", "--data-path", csv.string(), "--config", cfg.string(),
               "--out", run_dir.string(), "--seed", "3"}).code == 0);
  CHECK(slurp(run_dir / "model.xnnt") == model_bytes);

  const Result ru = run({"rules", "--out", run_dir.string()});
  REQUIRE_MESSAGE(ru.code == 0, ru.err);
  CHECK(fs::exists(run_dir / "dictionary.json"));
  CHECK(ru.out.find("Active features") != std::string::npos);

  const Result ex = run({"explain", "--out", run_dir.string(), "--instance",
                         R"({"age": 40, "fnlwgt": 100000, "education-num": 14,
                             "capital-gain": 15000, "capital-loss": 0,
                             "hours-per-week": 50})"});
  REQUIRE_MESSAGE(ex.code == 0, ex.err);
  CHECK(ex.out.find("Output logits") != std::string::npos);
  CHECK(fs::exists(run_dir / "explanation.json"));
  CHECK(run({"explain", "--out", run_dir.string(), "--instance", "{\"age\": 1}"}).code ==
        cli::kFailure);
  CHECK(run({"explain", "--out", run_dir.string(), "--instance", "not json"}).code ==
        cli::kFailure);

  const Result e1 = run({"eval", "--data-path", csv.string(), "--config", cfg.string(),
                         "--model", "xnntab,logreg", "--out", (dir / "e1").string()});
  REQUIRE_MESSAGE(e1.code == 0, e1.err);
  CHECK(e1.out.find("XNNTab") != std::string::npos);
  REQUIRE(run({"eval", "--data-path", csv.string(), "--config", cfg.string(), "--model",
               "xnntab,logreg", "--out", (dir / "e2").string()}).code == 0);
  for (const char* f : {"report_adult_xnntab.json", "report_adult_logreg.json"}) {
    CHECK(!slurp(dir / "e1" / f).empty());
    CHECK(slurp(dir / "e1" / f) == slurp(dir / "e2" / f));
  }

  for (const char* kind : {"logreg", "cart"}) {
    const Result b = run({"train", "--data-path", csv.string(), "--model", kind, "--out",
                          (dir / kind).string()});
    CHECK_MESSAGE(b.code == 0, b.err);
    CHECK(fs::exists(dir / kind / (std::string(kind) + ".json")));
  }
}

TEST_CASE("cli: explain the published positive instance with the shipped model") {
  const fs::path dir = scratch("reference");
  const Result r = run({"explain", "--artifact", testing::fixture("reference_model.xnnt").string(),
                        "--dictionary",
                        testing::fixture("reference_dictionary.json").string(),
                        "--out", dir.string(), "--instance",
                        R"({"age": 48, "fnlwgt": 175622, "education-num": 15,
                            "capital-gain": 99999, "capital-loss": 0,
                            "hours-per-week": 60})"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("-11.509") != std::string::npos);
  CHECK(r.out.find("18.567") != std::string::npos);
  CHECK(r.out.find("cg > 8296 and hpw > 22") != std::string::npos);
  CHECK(r.out.find("Predicted: >50K") != std::string::npos);
}
