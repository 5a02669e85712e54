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

// Command-line front end: prepare, train, rules, explain, eval.

#ifndef XNNTAB_CLI_HPP_
#define XNNTAB_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/eval.hpp"
#include "xnntab/rules.hpp"

namespace xnntab::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;      // library or validation error
inline constexpr int kMissingFile = 2;  // input file or artifact absent
inline constexpr int kLocked = 3;       // output directory in use

// Environment variable naming the default data directory.
inline constexpr const char* kDataDirEnv = "XNNTAB_DATA_DIR";

struct RunConfig {
  std::string dataset = "adult";
  std::filesystem::path data_path;  // file, data directory or cache directory
  std::uint64_t seed = 0;
  std::string model = "xnntab";
  std::filesystem::path out = "out";
  std::size_t fold = 0;
  EvalConfig eval;
  RuleMinerConfig rules;

  // Dataset defaults with `overrides` merged on top. Recognized keys:
  // dataset, seed, fold, model, xnntab, logreg, cart, rules.
  static RunConfig resolve(const std::string& dataset,
                           const nlohmann::json& overrides);
  nlohmann::json to_json() const;
};

// CSV file name a dataset is distributed under.
std::string default_file_name(const std::string& dataset);

// Resolves `data_path` (may be empty) to a CSV file or a prepared cache and
// loads it. Throws MissingFileError when nothing is found.
TabularDataset load_input(const std::string& dataset,
                          const std::filesystem::path& data_path);

class MissingFileError : public Error {
 public:
  MissingFileError(const std::filesystem::path& path, const std::string& hint = "")
      : Error("file not found: '" + path.string() + "'" +
              (hint.empty() ? "" : " (" + hint + ")")) {}
};

// Holds <dir>/.xnntab.lock for its lifetime.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

class LockedError : public Error {
 public:
  using Error::Error;
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xnntab::cli

#endif  // XNNTAB_CLI_HPP_
