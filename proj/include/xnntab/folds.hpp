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

#ifndef XNNTAB_FOLDS_HPP_
#define XNNTAB_FOLDS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace xnntab {

inline constexpr std::size_t kNumFolds = 5;

struct FoldSplit {
  std::size_t fold = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Classic 5-fold rotation over one seeded shuffle: fold k tests on the k-th
// 20% block. The remaining 80% is shuffled again (fold-specific stream) and
// cut 65:15 of the whole, i.e. 18.75% of the remainder goes to validation.
std::array<FoldSplit, kNumFolds> make_folds(std::size_t n, std::uint64_t seed);

}  // namespace xnntab

#endif  // XNNTAB_FOLDS_HPP_
