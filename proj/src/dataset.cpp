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

#include "xnntab/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>

#include "binary_io.hpp"
#include "xnntab/csv.hpp"
#include "xnntab/errors.hpp"

namespace xnntab {

namespace {

constexpr int kCacheFormatVersion = 1;

enum class Encoding { kNumeric, kBinaryNumeric, kOneHot, kBinaryCategory };

struct ColumnSpec {
  std::string name;
  std::vector<std::string> aliases;
  Encoding encoding = Encoding::kNumeric;
  std::string short_name;
  std::string positive_category;  // kBinaryCategory only
};

struct DatasetSpec {
  std::string name;
  std::vector<ColumnSpec> columns;
  std::string label;
  std::vector<std::string> label_aliases;
  std::function<std::optional<int>(const std::string&)> parse_label;
  std::array<std::string, 2> class_names;
  // Rows with a missing numeric cell are dropped instead of rejected.
  bool drop_missing = false;
};

// Lowercase and unify '-', '_', '.', ' ' so "capital_gain" == "capital-gain".
std::string header_key(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '_' || c == '.' || c == ' ') c = '-';
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return key;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

DatasetSpec adult_spec() {
  DatasetSpec spec;
  spec.name = "adult";
  spec.columns = {
      {"age", {}, Encoding::kNumeric, "age", {}},
      {"fnlwgt", {"final-weight"}, Encoding::kNumeric, "fnlwgt", {}},
      {"education-num", {"educational-num"}, Encoding::kNumeric, "edu_num", {}},
      {"capital-gain", {}, Encoding::kNumeric, "cg", {}},
      {"capital-loss", {}, Encoding::kNumeric, "cl", {}},
      {"hours-per-week", {}, Encoding::kNumeric, "hpw", {}},
  };
  spec.label = "income";
  spec.label_aliases = {"class", "target"};
  spec.parse_label = [](const std::string& cell) -> std::optional<int> {
    std::string v = cell;
    if (!v.empty() && v.back() == '.') v.pop_back();
    if (v == ">50K") return 1;
    if (v == "<=50K") return 0;
    return std::nullopt;
  };
  spec.class_names = {"<=50K", ">50K"};
  spec.drop_missing = true;
  return spec;
}

DatasetSpec churn_spec() {
  DatasetSpec spec;
  spec.name = "churn";
  spec.columns = {
      {"CreditScore", {}, Encoding::kNumeric, {}, {}},
      {"Geography", {}, Encoding::kOneHot, {}, {}},
      {"Gender", {}, Encoding::kBinaryCategory, {}, "Male"},
      {"Age", {}, Encoding::kNumeric, {}, {}},
      {"Tenure", {}, Encoding::kNumeric, {}, {}},
      {"Balance", {}, Encoding::kNumeric, {}, {}},
      {"NumOfProducts", {}, Encoding::kNumeric, {}, {}},
      {"HasCrCard", {}, Encoding::kBinaryNumeric, {}, {}},
      {"IsActiveMember", {}, Encoding::kBinaryNumeric, {}, {}},
      {"EstimatedSalary", {}, Encoding::kNumeric, {}, {}},
  };
  spec.label = "Exited";
  spec.parse_label = [](const std::string& cell) -> std::optional<int> {
    if (cell == "1" || cell == "1.0") return 1;
    if (cell == "0" || cell == "0.0") return 0;
    return std::nullopt;
  };
  spec.class_names = {"Stayed", "Exited"};
  return spec;
}

std::size_t find_column(const std::unordered_map<std::string, std::size_t>& by_key,
                        const std::string& name,
                        const std::vector<std::string>& aliases,
                        const std::string& dataset) {
  if (auto it = by_key.find(header_key(name)); it != by_key.end())
    return it->second;
  for (const auto& alias : aliases)
    if (auto it = by_key.find(header_key(alias)); it != by_key.end())
      return it->second;
  throw SchemaError(dataset + ": missing column '" + name + "'");
}

TabularDataset load_with_spec(const std::filesystem::path& path,
                              const DatasetSpec& spec) {
  const CsvTable table = read_csv(path);
  std::unordered_map<std::string, std::size_t> by_key;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    by_key.emplace(header_key(table.header[i]), i);

  std::vector<std::size_t> source(spec.columns.size());
  for (std::size_t c = 0; c < spec.columns.size(); ++c)
    source[c] = find_column(by_key, spec.columns[c].name,
                            spec.columns[c].aliases, spec.name);
  const std::size_t label_col =
      find_column(by_key, spec.label, spec.label_aliases, spec.name);

  FeatureSchema schema;
  schema.dataset = spec.name;
  schema.label_column = spec.label;
  schema.class_names = spec.class_names;

  // Category lists are sorted so the encoding does not depend on row order.
  std::vector<std::vector<std::string>> categories(spec.columns.size());
  for (std::size_t c = 0; c < spec.columns.size(); ++c) {
    const Encoding enc = spec.columns[c].encoding;
    if (enc != Encoding::kOneHot && enc != Encoding::kBinaryCategory) continue;
    std::set<std::string> seen;
    for (const auto& rec : table.records) {
      if (is_missing(rec.fields[source[c]])) {
        throw ParseError(spec.name + ": missing value in column '" +
                             spec.columns[c].name + "'",
                         rec.line);
      }
      seen.insert(rec.fields[source[c]]);
    }
    categories[c].assign(seen.begin(), seen.end());
  }

  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i == label_col) continue;
    ColumnDescriptor col;
    col.name = table.header[i];
    col.kind = ColumnKind::kDropped;
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
      if (source[c] != i) continue;
      const Encoding enc = spec.columns[c].encoding;
      if (enc == Encoding::kOneHot || enc == Encoding::kBinaryCategory) {
        col.kind = ColumnKind::kCategorical;
        col.categories = categories[c];
      } else {
        col.kind = ColumnKind::kNumeric;
      }
      col.name = spec.columns[c].name;
    }
    schema.columns.push_back(std::move(col));
  }

  // Encoded feature layout, one entry per model input.
  struct Slot {
    std::size_t spec_column;
    std::string category;  // non-empty for indicator features
  };
  std::vector<Slot> slots;
  for (std::size_t c = 0; c < spec.columns.size(); ++c) {
    const ColumnSpec& cs = spec.columns[c];
    FeatureDescriptor fd;
    fd.source_column = cs.name;
    fd.short_name = cs.short_name;
    switch (cs.encoding) {
      case Encoding::kNumeric:
        fd.name = cs.name;
        schema.features.push_back(fd);
        slots.push_back({c, {}});
        break;
      case Encoding::kBinaryNumeric:
        fd.name = cs.name;
        fd.kind = FeatureKind::kBinary;
        schema.features.push_back(fd);
        slots.push_back({c, {}});
        break;
      case Encoding::kOneHot:
        for (const auto& cat : categories[c]) {
          fd.name = cs.name + "_" + cat;
          fd.kind = FeatureKind::kBinary;
          fd.category = cat;
          schema.features.push_back(fd);
          slots.push_back({c, cat});
        }
        break;
      case Encoding::kBinaryCategory:
        fd.name = cs.name + "_" + cs.positive_category;
        fd.kind = FeatureKind::kBinary;
        fd.category = cs.positive_category;
        schema.features.push_back(fd);
        slots.push_back({c, cs.positive_category});
        break;
    }
  }

  const std::size_t d = schema.features.size();
  std::vector<double> values;
  values.reserve(table.records.size() * d);
  Labels labels;
  labels.reserve(table.records.size());
  std::vector<double> row(d);
  for (const auto& rec : table.records) {
    bool skip = false;
    for (std::size_t f = 0; f < d && !skip; ++f) {
      const ColumnSpec& cs = spec.columns[slots[f].spec_column];
      const std::string& cell = rec.fields[source[slots[f].spec_column]];
      if (!slots[f].category.empty()) {
        row[f] = cell == slots[f].category ? 1.0 : 0.0;
        continue;
      }
      if (is_missing(cell)) {
        if (spec.drop_missing) {
          skip = true;
          continue;
        }
        throw ParseError(spec.name + ": missing value in column '" + cs.name +
                             "'",
                         rec.line);
      }
      const auto parsed = parse_double(cell);
      if (!parsed) {
        throw ParseError(spec.name + ": cannot parse '" + cell +
                             "' in column '" + cs.name + "'",
                         rec.line);
      }
      if (cs.encoding == Encoding::kBinaryNumeric && *parsed != 0.0 &&
          *parsed != 1.0) {
        throw ParseError(spec.name + ": column '" + cs.name +
                             "' must be 0 or 1, found '" + cell + "'",
                         rec.line);
      }
      row[f] = *parsed;
    }
    if (skip) continue;
    const auto label = spec.parse_label(rec.fields[label_col]);
    if (!label) {
      throw ParseError(spec.name + ": unrecognized label '" +
                           rec.fields[label_col] + "'",
                       rec.line);
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(*label);
  }

  TabularDataset ds;
  ds.name = spec.name;
  ds.labels = std::move(labels);
  ds.raw = DenseMatrix(ds.labels.size(), d, std::move(values));
  ds.schema = std::move(schema);
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (!all.empty()) ds.schema = fit_normalization(ds, all);
  ds.features = apply_normalization(ds.schema, ds.raw);
  return ds;
}

const char* kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kDropped: return "dropped";
  }
  return "dropped";
}

ColumnKind parse_column_kind(const std::string& s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "dropped") return ColumnKind::kDropped;
  throw SchemaError("unknown column kind '" + s + "'");
}

}  // namespace

std::size_t FeatureSchema::feature_index(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name || features[i].short_name == name) return i;
  throw SchemaError("unknown feature '" + name + "'");
}

double FeatureSchema::normalize(std::size_t feature, double raw) const {
  const FeatureDescriptor& fd = features.at(feature);
  const double span = fd.max - fd.min;
  if (span <= 0.0) return 0.0;
  return std::clamp((raw - fd.min) / span, 0.0, 1.0);
}

double FeatureSchema::denormalize(std::size_t feature, double value) const {
  const FeatureDescriptor& fd = features.at(feature);
  return fd.min + value * (fd.max - fd.min);
}

std::string FeatureSchema::hash() const {
  nlohmann::json j = *this;
  return detail::hex64(detail::fnv1a(j.dump()));
}

void to_json(nlohmann::json& j, const FeatureSchema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns) {
    nlohmann::json cj = {{"name", c.name}, {"kind", kind_name(c.kind)}};
    if (c.kind == ColumnKind::kCategorical) cj["categories"] = c.categories;
    cols.push_back(std::move(cj));
  }
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : schema.features) {
    feats.push_back({{"name", f.name},
                     {"short_name", f.short_name},
                     {"kind", f.kind == FeatureKind::kBinary ? "binary" : "numeric"},
                     {"min", f.min},
                     {"max", f.max},
                     {"source_column", f.source_column},
                     {"category", f.category}});
  }
  j = {{"dataset", schema.dataset},
       {"columns", std::move(cols)},
       {"features", std::move(feats)},
       {"label_column", schema.label_column},
       {"class_names", schema.class_names}};
}

void from_json(const nlohmann::json& j, FeatureSchema& schema) {
  schema = FeatureSchema{};
  schema.dataset = j.at("dataset").get<std::string>();
  for (const auto& cj : j.at("columns")) {
    ColumnDescriptor c;
    c.name = cj.at("name").get<std::string>();
    c.kind = parse_column_kind(cj.at("kind").get<std::string>());
    if (cj.contains("categories"))
      c.categories = cj.at("categories").get<std::vector<std::string>>();
    schema.columns.push_back(std::move(c));
  }
  for (const auto& fj : j.at("features")) {
    FeatureDescriptor f;
    f.name = fj.at("name").get<std::string>();
    f.short_name = fj.value("short_name", std::string{});
    const auto kind = fj.at("kind").get<std::string>();
    if (kind != "binary" && kind != "numeric")
      throw SchemaError("unknown feature kind '" + kind + "'");
    f.kind = kind == "binary" ? FeatureKind::kBinary : FeatureKind::kNumeric;
    f.min = fj.at("min").get<double>();
    f.max = fj.at("max").get<double>();
    if (f.min > f.max)
      throw SchemaError("feature '" + f.name + "' has min > max");
    f.source_column = fj.value("source_column", f.name);
    f.category = fj.value("category", std::string{});
    schema.features.push_back(std::move(f));
  }
  schema.label_column = j.at("label_column").get<std::string>();
  schema.class_names = j.at("class_names").get<std::array<std::string, 2>>();
}

TabularDataset load_adult(const std::filesystem::path& path) {
  return load_with_spec(path, adult_spec());
}

TabularDataset load_churn(const std::filesystem::path& path) {
  return load_with_spec(path, churn_spec());
}

TabularDataset load_dataset(const std::string& name,
                            const std::filesystem::path& path) {
  if (name == "adult") return load_adult(path);
  if (name == "churn") return load_churn(path);
  throw ValidationError("unknown dataset '" + name +
                        "' (expected adult or churn)");
}

FeatureSchema fit_normalization(const TabularDataset& dataset,
                                std::span<const std::size_t> rows) {
  if (rows.empty()) throw ValidationError("fit_normalization: no rows");
  FeatureSchema schema = dataset.schema;
  for (std::size_t f = 0; f < schema.features.size(); ++f) {
    FeatureDescriptor& fd = schema.features[f];
    if (fd.kind == FeatureKind::kBinary) {
      fd.min = 0.0;
      fd.max = 1.0;
      continue;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, dataset.raw(r, f));
      hi = std::max(hi, dataset.raw(r, f));
    }
    fd.min = lo;
    fd.max = hi;
  }
  return schema;
}

DenseMatrix apply_normalization(const FeatureSchema& schema,
                                const DenseMatrix& raw) {
  if (raw.cols() != schema.n_features()) {
    throw DimensionError("apply_normalization: matrix " + raw.shape_string() +
                         " vs " + std::to_string(schema.n_features()) +
                         " schema features");
  }
  DenseMatrix out(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < raw.rows(); ++r)
    for (std::size_t f = 0; f < raw.cols(); ++f)
      out(r, f) = schema.normalize(f, raw(r, f));
  return out;
}

DenseMatrix denormalize(const FeatureSchema& schema,
                        const DenseMatrix& normalized) {
  if (normalized.cols() != schema.n_features()) {
    throw DimensionError("denormalize: matrix " + normalized.shape_string() +
                         " vs " + std::to_string(schema.n_features()) +
                         " schema features");
  }
  DenseMatrix out(normalized.rows(), normalized.cols());
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t f = 0; f < out.cols(); ++f)
      out(r, f) = schema.denormalize(f, normalized(r, f));
  return out;
}

TabularDataset renormalized(const TabularDataset& dataset,
                            const FeatureSchema& schema) {
  TabularDataset out = dataset;
  out.schema = schema;
  out.features = apply_normalization(schema, dataset.raw);
  return out;
}

TabularDataset subset(const TabularDataset& dataset,
                      std::span<const std::size_t> rows) {
  TabularDataset out;
  out.name = dataset.name;
  out.schema = dataset.schema;
  out.raw = dataset.raw.select_rows(rows);
  out.features = dataset.features.select_rows(rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(dataset.labels.at(r));
  return out;
}

DenseMatrix encode_record(const FeatureSchema& schema,
                          const nlohmann::json& record) {
  if (!record.is_object())
    throw ValidationError("instance must be a JSON object keyed by feature");
  DenseMatrix out(1, schema.n_features());
  auto lookup = [&](const FeatureDescriptor& fd) -> const nlohmann::json* {
    for (const std::string* key : {&fd.source_column, &fd.name, &fd.short_name}) {
      if (key->empty()) continue;
      if (auto it = record.find(*key); it != record.end()) return &*it;
    }
    return nullptr;
  };
  for (std::size_t f = 0; f < schema.n_features(); ++f) {
    const FeatureDescriptor& fd = schema.features[f];
    const nlohmann::json* cell = lookup(fd);
    if (cell == nullptr)
      throw SchemaError("instance is missing feature '" + fd.source_column + "'");
    if (!fd.category.empty() && cell->is_string()) {
      out(0, f) = cell->get<std::string>() == fd.category ? 1.0 : 0.0;
      continue;
    }
    if (cell->is_boolean()) {
      out(0, f) = cell->get<bool>() ? 1.0 : 0.0;
    } else if (cell->is_number()) {
      out(0, f) = cell->get<double>();
    } else if (cell->is_string()) {
      const auto v = parse_double(cell->get<std::string>());
      if (!v) throw ValidationError("feature '" + fd.name + "' is not numeric");
      out(0, f) = *v;
    } else {
      throw ValidationError("feature '" + fd.name + "' has an unsupported type");
    }
  }
  return out;
}

void write_cache(const TabularDataset& dataset,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string matrix_name = dataset.name + ".matrix.bin";
  nlohmann::json manifest = {
      {"format_version", kCacheFormatVersion},
      {"dataset", dataset.name},
      {"rows", dataset.size()},
      {"n_features", dataset.schema.n_features()},
      {"matrix_file", matrix_name},
      {"matrix_layout",
       "float64 little-endian, row-major, rows x (n_features + 1), raw units, "
       "label in last column"},
      {"schema", dataset.schema},
      {"schema_hash", dataset.schema.hash()}};
  {
    std::ofstream out(dir / (dataset.name + ".manifest.json"));
    if (!out) throw IoError("cannot write manifest in '" + dir.string() + "'");
    out << manifest.dump(2) << '\n';
  }
  std::ofstream bin(dir / matrix_name, std::ios::binary);
  if (!bin) throw IoError("cannot write '" + (dir / matrix_name).string() + "'");
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    detail::write_f64(bin, dataset.raw.row(r));
    const double label = dataset.labels[r];
    detail::write_f64(bin, std::span<const double>(&label, 1));
  }
}

TabularDataset read_cache(const std::filesystem::path& dir,
                          const std::string& name) {
  const auto manifest_path = dir / (name + ".manifest.json");
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open '" + manifest_path.string() + "'");
  const nlohmann::json manifest = nlohmann::json::parse(in);
  if (manifest.at("format_version").get<int>() != kCacheFormatVersion)
    throw SchemaError("unsupported cache format version");
  TabularDataset ds;
  ds.name = manifest.at("dataset").get<std::string>();
  ds.schema = manifest.at("schema").get<FeatureSchema>();
  const auto rows = manifest.at("rows").get<std::size_t>();
  const auto d = manifest.at("n_features").get<std::size_t>();
  if (d != ds.schema.n_features())
    throw SchemaError("cache feature count disagrees with schema");
  const auto matrix_path = dir / manifest.at("matrix_file").get<std::string>();
  std::ifstream bin(matrix_path, std::ios::binary);
  if (!bin) throw IoError("cannot open '" + matrix_path.string() + "'");
  ds.raw = DenseMatrix(rows, d);
  ds.labels.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    detail::read_f64(bin, ds.raw.row(r));
    double label = 0.0;
    detail::read_f64(bin, std::span<double>(&label, 1));
    ds.labels[r] = static_cast<int>(label);
  }
  ds.features = apply_normalization(ds.schema, ds.raw);
  return ds;
}

}  // namespace xnntab
