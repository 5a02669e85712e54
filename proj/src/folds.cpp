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

#include "xnntab/folds.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "xnntab/errors.hpp"
#include "xnntab/rng.hpp"

namespace xnntab {

namespace {
constexpr double kValidationShareOfRemainder = 0.15 / 0.80;
}

std::array<FoldSplit, kNumFolds> make_folds(std::size_t n,
                                            std::uint64_t seed) {
  if (n < kNumFolds) {
    throw ValidationError("make_folds: need at least 5 rows, got " +
                          std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = derive_rng(seed, 0x5F01D5ULL);
  shuffle(std::span<std::size_t>(order), rng);

  std::array<FoldSplit, kNumFolds> folds;
  for (std::size_t k = 0; k < kNumFolds; ++k) {
    const std::size_t begin = k * n / kNumFolds;
    const std::size_t end = (k + 1) * n / kNumFolds;
    FoldSplit& split = folds[k];
    split.fold = k;
    split.seed = seed;
    split.test.assign(order.begin() + begin, order.begin() + end);

    std::vector<std::size_t> rest;
    rest.reserve(n - (end - begin));
    rest.insert(rest.end(), order.begin(), order.begin() + begin);
    rest.insert(rest.end(), order.begin() + end, order.end());
    Rng fold_rng = derive_rng(seed, 0xF0000ULL + k);
    shuffle(std::span<std::size_t>(rest), fold_rng);

    const auto n_val = static_cast<std::size_t>(
        std::llround(static_cast<double>(rest.size()) *
                     kValidationShareOfRemainder));
    split.validation.assign(rest.begin(), rest.begin() + n_val);
    split.train.assign(rest.begin() + n_val, rest.end());
  }
  return folds;
}

}  // namespace xnntab
