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

#ifndef XNNTAB_TESTS_TEST_SUPPORT_HPP_
#define XNNTAB_TESTS_TEST_SUPPORT_HPP_

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

namespace xnntab::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(XNNTAB_TEST_DATA_DIR) / name;
}

// Full datasets live outside the test tree. XNNTAB_DATA_DIR overrides the
// build-time default.
inline std::optional<std::filesystem::path> dataset_file(const std::string& name) {
  std::filesystem::path dir;
  if (const char* env = std::getenv("XNNTAB_DATA_DIR"); env && *env) {
    dir = env;
  } else {
#ifdef XNNTAB_DEFAULT_DATA_DIR
    dir = XNNTAB_DEFAULT_DATA_DIR;
#endif
  }
  const auto path = dir / (name == "churn" ? "Churn_Modelling.csv" : name + ".csv");
  if (dir.empty() || !std::filesystem::exists(path)) return std::nullopt;
  return path;
}

}  // namespace xnntab::testing

#endif  // XNNTAB_TESTS_TEST_SUPPORT_HPP_
