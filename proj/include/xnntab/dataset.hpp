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

#ifndef XNNTAB_DATASET_HPP_
#define XNNTAB_DATASET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xnntab/matrix.hpp"
#include "xnntab/ops.hpp"

namespace xnntab {

enum class ColumnKind { kNumeric, kCategorical, kDropped };

// One column of the source CSV.
struct ColumnDescriptor {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Categorical only, sorted; fixes the one-hot order.
  std::vector<std::string> categories;
};

enum class FeatureKind { kNumeric, kBinary };

// One column of the encoded feature matrix the model sees.
struct FeatureDescriptor {
  std::string name;
  // Shorter label for rule text ("cg" for capital-gain); empty = use name.
  std::string short_name;
  FeatureKind kind = FeatureKind::kNumeric;
  // Min-max statistics in raw units. Binary features always use [0, 1].
  double min = 0.0;
  double max = 1.0;
  // Source CSV column; for one-hot features also the category it indicates.
  std::string source_column;
  std::string category;

  const std::string& display_name() const {
    return short_name.empty() ? name : short_name;
  }
};

struct FeatureSchema {
  std::string dataset;
  std::vector<ColumnDescriptor> columns;
  std::vector<FeatureDescriptor> features;
  std::string label_column;
  std::array<std::string, 2> class_names;

  std::size_t n_features() const { return features.size(); }
  // Index of a feature by name or short name; throws SchemaError if absent.
  std::size_t feature_index(const std::string& name) const;

  // (x - min) / (max - min) clipped to [0, 1]; constant columns map to 0.
  double normalize(std::size_t feature, double raw) const;
  double denormalize(std::size_t feature, double value) const;

  // FNV-1a over the canonical JSON form.
  std::string hash() const;
};

void to_json(nlohmann::json& j, const FeatureSchema& schema);
void from_json(const nlohmann::json& j, FeatureSchema& schema);

struct TabularDataset {
  std::string name;
  FeatureSchema schema;
  DenseMatrix raw;       // encoded features in raw units
  DenseMatrix features;  // normalized through `schema`
  Labels labels;

  std::size_t size() const { return labels.size(); }
};

// Adult with the six numeric columns; label 1 means income > 50K.
TabularDataset load_adult(const std::filesystem::path& path);
// Churn Modelling; one-hot Geography, binary Gender; label = Exited.
TabularDataset load_churn(const std::filesystem::path& path);
// Dispatches on "adult" / "churn".
TabularDataset load_dataset(const std::string& name,
                            const std::filesystem::path& path);

// Schema whose numeric min/max come from `rows` of `dataset.raw` only.
FeatureSchema fit_normalization(const TabularDataset& dataset,
                                std::span<const std::size_t> rows);
DenseMatrix apply_normalization(const FeatureSchema& schema,
                                const DenseMatrix& raw);
DenseMatrix denormalize(const FeatureSchema& schema,
                        const DenseMatrix& normalized);
// Copy of `dataset` with features recomputed under `schema`.
TabularDataset renormalized(const TabularDataset& dataset,
                            const FeatureSchema& schema);
// Row subset, features and labels together.
TabularDataset subset(const TabularDataset& dataset,
                      std::span<const std::size_t> rows);

// Encodes one raw record keyed by CSV column name (or feature name / short
// name) into a 1 x n_features raw-unit row.
DenseMatrix encode_record(const FeatureSchema& schema,
                          const nlohmann::json& record);

// Cache layout: <dir>/<name>.manifest.json holds the schema and the matrix
// description; <dir>/<name>.matrix.bin holds rows x (n_features + 1)
// little-endian float64 values, row-major, raw units, label in the last
// column.
void write_cache(const TabularDataset& dataset,
                 const std::filesystem::path& dir);
TabularDataset read_cache(const std::filesystem::path& dir,
                          const std::string& name);

}  // namespace xnntab

#endif  // XNNTAB_DATASET_HPP_
