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

#ifndef XNNTAB_CSV_HPP_
#define XNNTAB_CSV_HPP_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xnntab {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRecord> records;
};

// Comma-delimited, optional double-quote quoting, header on the first line.
// Fields are trimmed of surrounding whitespace; blank lines are skipped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

// Strict full-string parse of a real number.
std::optional<double> parse_double(std::string_view text);

}  // namespace xnntab

#endif  // XNNTAB_CSV_HPP_
