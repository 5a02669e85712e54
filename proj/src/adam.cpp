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

#include "xnntab/adam.hpp"

#include <cmath>

#include "xnntab/errors.hpp"

namespace xnntab {

AdamState AdamState::for_param(const DenseMatrix& param, double lr) {
  AdamState state;
  state.m = DenseMatrix(param.rows(), param.cols());
  state.v = DenseMatrix(param.rows(), param.cols());
  state.lr = lr;
  return state;
}

void adam_step(DenseMatrix& param, const DenseMatrix& grad, AdamState& state) {
  if (!param.same_shape(grad) || !param.same_shape(state.m) ||
      !param.same_shape(state.v)) {
    throw DimensionError("adam_step: parameter " + param.shape_string() +
                         ", gradient " + grad.shape_string() + ", moments " +
                         state.m.shape_string());
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto p = param.values();
  auto g = grad.values();
  auto m = state.m.values();
  auto v = state.v.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace xnntab
