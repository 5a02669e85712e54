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

// Model artifact layout (all integers little-endian):
//
//   offset 0   8 bytes   magic "XNNTABM\n"
//   offset 8   uint64    header length H
//   offset 16  H bytes   UTF-8 JSON header:
//                        {format_version, stage, config, schema, schema_hash,
//                         blocks: [{name, rows, cols}, ...]}
//   then       float64   weight blocks, row-major, in header order:
//                        body.<l>.weight, body.<l>.bias for each layer l,
//                        head.weight, sae.dictionary, sae.bias,
//                        merged.weight (merged stage only)

#ifndef XNNTAB_SERIALIZATION_HPP_
#define XNNTAB_SERIALIZATION_HPP_

#include <filesystem>
#include <iosfwd>

#include "xnntab/model.hpp"

namespace xnntab {

inline constexpr int kModelFormatVersion = 1;

void save_model(const XnnTabModel& model, std::ostream& out);
void save_model(const XnnTabModel& model, const std::filesystem::path& path);

XnnTabModel load_model(std::istream& in);
XnnTabModel load_model(const std::filesystem::path& path);

}  // namespace xnntab

#endif  // XNNTAB_SERIALIZATION_HPP_
