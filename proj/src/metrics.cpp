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

#include "xnntab/metrics.hpp"

#include <array>
#include <string>

#include "xnntab/errors.hpp"

namespace xnntab {

namespace {

void check_inputs(std::span<const int> predictions,
                  std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ValidationError("metric inputs differ in length: " +
                          std::to_string(predictions.size()) + " vs " +
                          std::to_string(labels.size()));
  }
  if (labels.empty()) throw ValidationError("metric inputs are empty");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if ((labels[i] != 0 && labels[i] != 1) ||
        (predictions[i] != 0 && predictions[i] != 1)) {
      throw ValidationError("metrics expect binary class indices");
    }
  }
}

}  // namespace

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  check_inputs(predictions, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double macro_f1(std::span<const int> predictions, std::span<const int> labels) {
  check_inputs(predictions, labels);
  // counts[truth][predicted]
  std::array<std::array<double, 2>, 2> counts{};
  for (std::size_t i = 0; i < labels.size(); ++i)
    counts[labels[i]][predictions[i]] += 1.0;
  double total = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double tp = counts[k][k];
    const double fp = counts[1 - k][k];
    const double fn = counts[k][1 - k];
    const double denom = 2.0 * tp + fp + fn;
    total += denom == 0.0 ? 0.0 : 2.0 * tp / denom;
  }
  return total / 2.0;
}

}  // namespace xnntab
