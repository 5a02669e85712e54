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

#ifndef XNNTAB_METRICS_HPP_
#define XNNTAB_METRICS_HPP_

#include <span>

namespace xnntab {

double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Unweighted mean of the two per-class F1 scores. A class with no true and no
// predicted instances scores 0.
double macro_f1(std::span<const int> predictions, std::span<const int> labels);

}  // namespace xnntab

#endif  // XNNTAB_METRICS_HPP_
