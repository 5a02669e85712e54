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

// OpenMP kernels against the serial reference on training-sized shapes.

#include <benchmark/benchmark.h>

#include "xnntab/kernels.hpp"
#include "xnntab/rng.hpp"

namespace {

using xnntab::DenseMatrix;

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  xnntab::Rng rng(seed);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = xnntab::uniform(rng, -1.0, 1.0);
  return m;
}

// Forward layer: (batch x in) * (out x in)^T.
template <DenseMatrix (*Kernel)(const DenseMatrix&, const DenseMatrix&)>
void BM_MatmulNT(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = static_cast<std::size_t>(state.range(1));
  const auto out = static_cast<std::size_t>(state.range(2));
  const DenseMatrix x = random_matrix(n, in, 1);
  const DenseMatrix w = random_matrix(out, in, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * in * out));
}

// Weight gradient: (batch x out)^T * (batch x in).
template <DenseMatrix (*Kernel)(const DenseMatrix&, const DenseMatrix&)>
void BM_MatmulTN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = static_cast<std::size_t>(state.range(1));
  const auto out = static_cast<std::size_t>(state.range(2));
  const DenseMatrix g = random_matrix(n, out, 3);
  const DenseMatrix x = random_matrix(n, in, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(g, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * in * out));
}

// Backprop through a layer: (batch x out) * (out x in).
template <DenseMatrix (*Kernel)(const DenseMatrix&, const DenseMatrix&)>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = static_cast<std::size_t>(state.range(1));
  const auto out = static_cast<std::size_t>(state.range(2));
  const DenseMatrix g = random_matrix(n, out, 5);
  const DenseMatrix w = random_matrix(out, in, 6);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(g, w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * in * out));
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({256, 6, 97});      // first Adult layer, one batch
  b->Args({256, 97, 30});
  b->Args({31747, 7, 21});    // SAE encode over the Adult training split
  b->Args({1024, 512, 512});  // large square-ish case
}

BENCHMARK(BM_MatmulNT<xnntab::matmul_nt>)->Name("matmul_nt/parallel")->Apply(shapes);
BENCHMARK(BM_MatmulNT<xnntab::reference::matmul_nt>)->Name("matmul_nt/reference")->Apply(shapes);
BENCHMARK(BM_MatmulTN<xnntab::matmul_tn>)->Name("matmul_tn/parallel")->Apply(shapes);
BENCHMARK(BM_MatmulTN<xnntab::reference::matmul_tn>)->Name("matmul_tn/reference")->Apply(shapes);
BENCHMARK(BM_Matmul<xnntab::matmul>)->Name("matmul/parallel")->Apply(shapes);
BENCHMARK(BM_Matmul<xnntab::reference::matmul>)->Name("matmul/reference")->Apply(shapes);

}  // namespace

BENCHMARK_MAIN();
