/* Copyright 2026 The segadv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SEGADV_ERROR_HPP_
#define SEGADV_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace segadv {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or grid extents disagree with what an operation expects.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A class label is outside [0, num_classes).
class LabelRangeError : public Error {
 public:
  LabelRangeError(const std::string& what, std::size_t row, std::size_t col,
                  unsigned label)
      : Error(what), row_(row), col_(col), label_(label) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }
  unsigned label() const { return label_; }

 private:
  std::size_t row_;
  std::size_t col_;
  unsigned label_;
};

// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file exists but does not follow the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Checkpoint carries a format version this build cannot read.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Checkpoint or stream ended before the declared payload.
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

// NaN/Inf encountered where finite values are required (loss, gradients).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The erased class covers the whole label map, so no fill source exists.
class NoBackgroundClassError : public Error {
 public:
  using Error::Error;
};

// A model backend (local or remote) failed to answer a query.
class ModelError : public Error {
 public:
  using Error::Error;
};

// An attack stopped early; carries the iteration at which it failed.
class AttackAbortedError : public Error {
 public:
  enum class Cause { kNonFiniteGradient, kModelFailure };

  AttackAbortedError(const std::string& what, std::size_t iteration,
                     Cause cause)
      : Error(what), iteration_(iteration), cause_(cause) {}

  std::size_t iteration() const { return iteration_; }
  Cause cause() const { return cause_; }

 private:
  std::size_t iteration_;
  Cause cause_;
};

}  // namespace segadv

#endif  // SEGADV_ERROR_HPP_
