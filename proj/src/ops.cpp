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

#include "xnntab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xnntab/errors.hpp"

namespace xnntab {

namespace {

void require_same_shape(const char* op, const DenseMatrix& a,
                        const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         a.shape_string() + " vs " + b.shape_string());
  }
}

template <typename F>
DenseMatrix zip(const char* op, const DenseMatrix& a, const DenseMatrix& b,
                F f) {
  require_same_shape(op, a, b);
  DenseMatrix out(a.rows(), a.cols());
  auto lhs = a.values();
  auto rhs = b.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = f(lhs[i], rhs[i]);
  return out;
}

}  // namespace

DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

DenseMatrix relu_backward(const DenseMatrix& upstream, const DenseMatrix& pre) {
  return zip("relu_backward", upstream, pre,
             [](double g, double p) { return p > 0.0 ? g : 0.0; });
}

DenseMatrix add_row_bias(const DenseMatrix& x, const DenseMatrix& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw DimensionError("add_row_bias: bias " + bias.shape_string() +
                         " does not match " + x.shape_string());
  }
  DenseMatrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias(0, c);
  }
  return out;
}

DenseMatrix column_sums(const DenseMatrix& x) {
  DenseMatrix out(1, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out(0, c) += row[c];
  }
  return out;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  return zip("add", a, b, [](double x, double y) { return x + y; });
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  return zip("subtract", a, b, [](double x, double y) { return x - y; });
}

DenseMatrix scale(const DenseMatrix& a, double factor) {
  DenseMatrix out = a;
  for (double& v : out.values()) v *= factor;
  return out;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  return zip("hadamard", a, b, [](double x, double y) { return x * y; });
}

void add_inplace(DenseMatrix& target, const DenseMatrix& delta) {
  require_same_shape("add_inplace", target, delta);
  auto dst = target.values();
  auto src = delta.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

DenseMatrix softmax(const DenseMatrix& logits) {
  DenseMatrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    auto dst = out.row(r);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - peak);
      total += dst[c];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

std::size_t argmax_row(std::span<const double> row) {
  return static_cast<std::size_t>(
      std::max_element(row.begin(), row.end()) - row.begin());
}

std::vector<int> argmax_rows(const DenseMatrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r)
    out[r] = static_cast<int>(argmax_row(logits.row(r)));
  return out;
}

LossAndGrad softmax_cross_entropy(const DenseMatrix& logits,
                                  std::span<const int> labels) {
  if (logits.rows() != labels.size()) {
    throw DimensionError("softmax_cross_entropy: " +
                         std::to_string(labels.size()) + " labels for logits " +
                         logits.shape_string());
  }
  if (logits.rows() == 0) throw ValidationError("softmax_cross_entropy: empty");
  const double n = static_cast<double>(logits.rows());
  LossAndGrad result{0.0, DenseMatrix(logits.rows(), logits.cols())};
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= logits.cols()) {
      throw ValidationError("label " + std::to_string(label) +
                            " out of range for " +
                            std::to_string(logits.cols()) + " classes");
    }
    auto in = logits.row(r);
    auto g = result.grad.row(r);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      g[c] = std::exp(in[c] - peak);
      total += g[c];
    }
    // -log softmax_label = log(total) - (z_label - peak)
    result.loss += std::log(total) - (in[label] - peak);
    for (std::size_t c = 0; c < in.size(); ++c) {
      g[c] = (g[c] / total - (static_cast<int>(c) == label ? 1.0 : 0.0)) / n;
    }
  }
  result.loss /= n;
  return result;
}

LossAndGrad l1_penalty(const DenseMatrix& params, double lambda) {
  if (!(lambda >= 0.0)) {
    throw ValidationError("l1_penalty: lambda must be >= 0, got " +
                          std::to_string(lambda));
  }
  LossAndGrad result{0.0, DenseMatrix(params.rows(), params.cols())};
  auto src = params.values();
  auto g = result.grad.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    result.loss += std::abs(src[i]);
    g[i] = src[i] > 0.0 ? lambda : (src[i] < 0.0 ? -lambda : 0.0);
  }
  result.loss *= lambda;
  return result;
}

DropoutResult dropout_forward(const DenseMatrix& x, double rate, Rng& rng,
                              bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError("dropout rate must lie in [0, 1), got " +
                          std::to_string(rate));
  }
  if (!training) return {x, std::nullopt};
  DenseMatrix mask(x.rows(), x.cols(), 1.0);
  DenseMatrix out = x;
  if (rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - rate);
    auto m = mask.values();
    auto o = out.values();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (uniform01(rng) < rate) {
        m[i] = 0.0;
        o[i] = 0.0;
      } else {
        o[i] *= keep_scale;
      }
    }
  }
  return {std::move(out), std::move(mask)};
}

DenseMatrix finite_difference_grad(
    const std::function<double(const DenseMatrix&)>& f, const DenseMatrix& x,
    double h) {
  if (!(h > 0.0)) throw ValidationError("finite difference step must be > 0");
  DenseMatrix grad(x.rows(), x.cols());
  DenseMatrix probe = x;
  auto p = probe.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double up = f(probe);
    p[i] = saved - h;
    const double down = f(probe);
    p[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double relative_error(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape("relative_error", a, b);
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff += (x[i] - y[i]) * (x[i] - y[i]);
    na += x[i] * x[i];
    nb += y[i] * y[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

}  // namespace xnntab
