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

#ifndef XNNTAB_ERRORS_HPP_
#define XNNTAB_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xnntab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on a value (range, count, label) does not hold.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input columns or feature names do not match what is expected.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell of an input file could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An operation was invoked at the wrong training stage.
class StateError : public Error {
 public:
  using Error::Error;
};

// Optimization produced a non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A cross-validation fold failed; carries the fold index.
class FoldError : public Error {
 public:
  FoldError(std::size_t fold, const std::string& what)
      : Error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
  std::size_t fold() const { return fold_; }

 private:
  std::size_t fold_;
};

}  // namespace xnntab

#endif  // XNNTAB_ERRORS_HPP_
