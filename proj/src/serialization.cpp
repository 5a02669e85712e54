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

#include "xnntab/serialization.hpp"

#include <cmath>
#include <fstream>
#include <string_view>
#include <utility>

#include "binary_io.hpp"
#include "xnntab/errors.hpp"
#include "xnntab/kernels.hpp"

namespace xnntab {

namespace {

constexpr std::string_view kMagic = "XNNTABM\n";
constexpr std::uint64_t kMaxHeaderBytes = 1ULL << 26;

using NamedBlock = std::pair<std::string, const DenseMatrix*>;

std::vector<NamedBlock> blocks_of(const XnnTabModel& model) {
  std::vector<NamedBlock> blocks;
  for (std::size_t l = 0; l < model.body.layers.size(); ++l) {
    const std::string prefix = "body." + std::to_string(l);
    blocks.emplace_back(prefix + ".weight", &model.body.layers[l].weight);
    blocks.emplace_back(prefix + ".bias", &model.body.layers[l].bias);
  }
  blocks.emplace_back("head.weight", &model.head.weight);
  blocks.emplace_back("sae.dictionary", &model.sae.dictionary);
  blocks.emplace_back("sae.bias", &model.sae.bias);
  if (model.merged) blocks.emplace_back("merged.weight", &model.merged->weight);
  return blocks;
}

DenseMatrix read_block(std::istream& in, const nlohmann::json& desc,
                       const std::string& expected_name, std::size_t rows,
                       std::size_t cols) {
  const auto name = desc.at("name").get<std::string>();
  if (name != expected_name) {
    throw SchemaError("model block '" + name + "' found where '" +
                      expected_name + "' was expected");
  }
  if (desc.at("rows").get<std::size_t>() != rows ||
      desc.at("cols").get<std::size_t>() != cols) {
    throw SchemaError("model block '" + name + "' has an unexpected shape");
  }
  DenseMatrix m(rows, cols);
  detail::read_f64(in, m.values());
  if (!m.all_finite())
    throw SchemaError("model block '" + name + "' holds non-finite values");
  return m;
}

}  // namespace

void save_model(const XnnTabModel& model, std::ostream& out) {
  if ((model.stage == Stage::kMerged) != model.merged.has_value())
    throw StateError("merged head present iff stage is merged");
  nlohmann::json header;
  header["format_version"] = kModelFormatVersion;
  header["stage"] = stage_name(model.stage);
  header["config"] = model.config;
  header["schema"] = model.schema;
  header["schema_hash"] = model.schema.hash();
  header["sae_alpha"] = model.sae.alpha;
  nlohmann::json descs = nlohmann::json::array();
  const auto blocks = blocks_of(model);
  for (const auto& [name, m] : blocks)
    descs.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  header["blocks"] = std::move(descs);

  const std::string text = header.dump();
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  detail::write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : blocks) detail::write_f64(out, m->values());
  if (!out) throw IoError("model write failed");
}

void save_model(const XnnTabModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  save_model(model, out);
}

XnnTabModel load_model(std::istream& in) {
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw SchemaError("not an XNNTab model file");
  const std::uint64_t length = detail::read_u64(in);
  if (length > kMaxHeaderBytes) throw SchemaError("model header too large");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw IoError("model header truncated");
  const nlohmann::json header = nlohmann::json::parse(text);
  if (header.at("format_version").get<int>() != kModelFormatVersion) {
    throw SchemaError("unsupported model format version " +
                      header.at("format_version").dump());
  }

  XnnTabModel model;
  model.config = header.at("config").get<XnnTabConfig>();
  model.config.validate();
  model.schema = header.at("schema").get<FeatureSchema>();
  if (model.schema.hash() != header.at("schema_hash").get<std::string>())
    throw SchemaError("model schema hash mismatch");
  model.stage = parse_stage(header.at("stage").get<std::string>());

  const auto& descs = header.at("blocks");
  std::size_t next = 0;
  auto block = [&](const std::string& name, std::size_t rows,
                   std::size_t cols) {
    if (next >= descs.size()) throw SchemaError("model file lacks '" + name + "'");
    return read_block(in, descs[next++], name, rows, cols);
  };

  const MLPConfig& mlp = model.config.mlp;
  std::size_t fan_in = model.schema.n_features();
  model.body.dropout = mlp.dropout;
  for (std::size_t l = 0; l < mlp.hidden.size(); ++l) {
    const std::string prefix = "body." + std::to_string(l);
    DenseLayer layer;
    layer.weight = block(prefix + ".weight", mlp.hidden[l], fan_in);
    layer.bias = block(prefix + ".bias", 1, mlp.hidden[l]);
    model.body.layers.push_back(std::move(layer));
    fan_in = mlp.hidden[l];
  }
  const std::size_t d_in = fan_in;
  const std::size_t d_hid = model.config.sae.expansion * d_in;
  model.head.weight = block("head.weight", mlp.n_classes, d_in);
  model.sae.expansion = model.config.sae.expansion;
  model.sae.alpha = header.value("sae_alpha", model.config.sae.alpha);
  model.sae.dictionary = block("sae.dictionary", d_hid, d_in);
  model.sae.bias = block("sae.bias", 1, d_hid);
  if (model.stage == Stage::kMerged) {
    model.merged = MergedHead{block("merged.weight", mlp.n_classes, d_hid)};
  }
  if (next != descs.size()) throw SchemaError("model file has extra blocks");
  return model;
}

XnnTabModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load_model(in);
}

}  // namespace xnntab
