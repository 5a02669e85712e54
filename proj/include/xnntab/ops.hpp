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

#ifndef XNNTAB_OPS_HPP_
#define XNNTAB_OPS_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "xnntab/matrix.hpp"
#include "xnntab/rng.hpp"

namespace xnntab {

using Labels = std::vector<int>;

DenseMatrix relu(const DenseMatrix& x);
// Gradient of relu at `pre`, applied to the upstream gradient.
DenseMatrix relu_backward(const DenseMatrix& upstream, const DenseMatrix& pre);

// x + bias broadcast over rows; bias is 1 x cols.
DenseMatrix add_row_bias(const DenseMatrix& x, const DenseMatrix& bias);
// 1 x cols matrix of column sums.
DenseMatrix column_sums(const DenseMatrix& x);

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& a, double factor);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);
void add_inplace(DenseMatrix& target, const DenseMatrix& delta);

// Row-wise softmax with max subtraction.
DenseMatrix softmax(const DenseMatrix& logits);

std::size_t argmax_row(std::span<const double> row);
std::vector<int> argmax_rows(const DenseMatrix& logits);

struct LossAndGrad {
  double loss = 0.0;
  DenseMatrix grad;
};

// Mean cross-entropy over rows; grad = (softmax - onehot) / rows.
LossAndGrad softmax_cross_entropy(const DenseMatrix& logits,
                                  std::span<const int> labels);

// lambda * sum |w|, subgradient lambda * sign(w) with sign(0) = 0.
LossAndGrad l1_penalty(const DenseMatrix& params, double lambda);

struct DropoutResult {
  DenseMatrix out;
  std::optional<DenseMatrix> mask;  // absent in inference mode
};

// Inverted dropout: survivors are scaled by 1 / (1 - rate).
DropoutResult dropout_forward(const DenseMatrix& x, double rate, Rng& rng,
                              bool training);

// Activations kept from a forward pass for the backward pass.
struct LayerCache {
  DenseMatrix input;
  DenseMatrix pre;
  DenseMatrix post;
  std::optional<DenseMatrix> mask;
  double dropout_rate = 0.0;
};

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every entry.
DenseMatrix finite_difference_grad(
    const std::function<double(const DenseMatrix&)>& f, const DenseMatrix& x,
    double h);

// ||a - b|| / (||a|| + ||b||) in the Frobenius norm; 0 when both are zero.
double relative_error(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace xnntab

#endif  // XNNTAB_OPS_HPP_
