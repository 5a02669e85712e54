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

#ifndef XNNTAB_SRC_BINARY_IO_HPP_
#define XNNTAB_SRC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "xnntab/errors.hpp"

namespace xnntab::detail {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

inline std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  return bits;
}

inline void write_u64(std::ostream& out, std::uint64_t value) {
  const std::uint64_t le = to_little(value);
  out.write(reinterpret_cast<const char*>(&le), sizeof(le));
  if (!out) throw IoError("binary write failed");
}

inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t le = 0;
  in.read(reinterpret_cast<char*>(&le), sizeof(le));
  if (!in) throw IoError("binary read failed or file truncated");
  return to_little(le);
}

inline void write_f64(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void read_f64(std::istream& in, std::span<double> values) {
  for (double& v : values) v = std::bit_cast<double>(read_u64(in));
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = kDigits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace xnntab::detail

#endif  // XNNTAB_SRC_BINARY_IO_HPP_
