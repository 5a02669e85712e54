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

#include "xnntab/kernels.hpp"

#include <cstddef>
#include <string>

#include "xnntab/errors.hpp"

#ifdef XNNTAB_USE_OPENMP
#include <omp.h>
#endif

namespace xnntab {

namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 15;

void check_inner(const char* op, std::size_t lhs, std::size_t rhs,
                 const DenseMatrix& a, const DenseMatrix& b) {
  if (lhs != rhs) {
    throw DimensionError(std::string(op) + ": incompatible shapes " +
                         a.shape_string() + " and " + b.shape_string());
  }
}

// One output row per call; rows are independent.
inline void row_matmul(const DenseMatrix& a, const DenseMatrix& b,
                       DenseMatrix& out, std::size_t i) {
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
  double* dst = out.row(i).data();
  for (std::size_t k = 0; k < inner; ++k) {
    const double aik = a(i, k);
    const double* src = b.row(k).data();
    for (std::size_t j = 0; j < m; ++j) dst[j] += aik * src[j];
  }
}

inline void row_matmul_nt(const DenseMatrix& a, const DenseMatrix& b,
                          DenseMatrix& out, std::size_t i) {
  const std::size_t inner = a.cols();
  const double* lhs = a.row(i).data();
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* rhs = b.row(j).data();
    double acc = 0.0;
    for (std::size_t k = 0; k < inner; ++k) acc += lhs[k] * rhs[k];
    out(i, j) = acc;
  }
}

inline void row_matmul_tn(const DenseMatrix& a, const DenseMatrix& b,
                          DenseMatrix& out, std::size_t i) {
  const std::size_t m = b.cols();
  double* dst = out.row(i).data();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double aki = a(k, i);
    const double* src = b.row(k).data();
    for (std::size_t j = 0; j < m; ++j) dst[j] += aki * src[j];
  }
}

template <typename RowKernel>
void run_rows(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out,
              std::size_t work, RowKernel kernel) {
  const auto rows = static_cast<std::ptrdiff_t>(out.rows());
#ifdef XNNTAB_USE_OPENMP
#pragma omp parallel for schedule(static) if (work >= kParallelThreshold)
#endif
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    kernel(a, b, out, static_cast<std::size_t>(i));
  }
  (void)work;
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner("matmul", a.cols(), b.rows(), a, b);
  DenseMatrix out(a.rows(), b.cols());
  run_rows(a, b, out, a.rows() * a.cols() * b.cols(), row_matmul);
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner("matmul_nt", a.cols(), b.cols(), a, b);
  DenseMatrix out(a.rows(), b.rows());
  run_rows(a, b, out, a.rows() * a.cols() * b.rows(), row_matmul_nt);
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner("matmul_tn", a.rows(), b.rows(), a, b);
  DenseMatrix out(a.cols(), b.cols());
  run_rows(a, b, out, a.rows() * a.cols() * b.cols(), row_matmul_tn);
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

int kernel_threads() {
#ifdef XNNTAB_USE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace reference {

// Textbook triple loops. Each entry sums k = 0..n-1 from 0.0, the same order as
// the row kernels above.

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner("matmul", a.cols(), b.rows(), a, b);
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner("matmul_nt", a.cols(), b.cols(), a, b);
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      out(i, j) = acc;
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner("matmul_tn", a.rows(), b.rows(), a, b);
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace reference

}  // namespace xnntab
