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

#ifndef XNNTAB_ADAM_HPP_
#define XNNTAB_ADAM_HPP_

#include <cstdint>

#include "xnntab/matrix.hpp"

namespace xnntab {

struct AdamState {
  DenseMatrix m;
  DenseMatrix v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-3;

  // Zeroed moments shaped like `param`.
  static AdamState for_param(const DenseMatrix& param, double lr);
};

// One bias-corrected Adam update of `param` in place.
void adam_step(DenseMatrix& param, const DenseMatrix& grad, AdamState& state);

}  // namespace xnntab

#endif  // XNNTAB_ADAM_HPP_
