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

#ifndef XNNTAB_KERNELS_HPP_
#define XNNTAB_KERNELS_HPP_

#include "xnntab/matrix.hpp"

namespace xnntab {

// Matrix products used by every layer. The OpenMP kernels split work over
// output rows only; each output entry is accumulated in the same order as in
// the serial reference, so both produce bitwise identical results.

// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

// Number of threads the kernels will use (1 when built without OpenMP).
int kernel_threads();

namespace reference {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace reference

}  // namespace xnntab

#endif  // XNNTAB_KERNELS_HPP_
