// include/adfuse/error.h

// Copyright 2026  The adfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ADFUSE_ERROR_H_
#define ADFUSE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adfuse {

/// Base class of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed transcript container (bad speaker marker, empty file).
class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t line)
      : Error(what), line_(line) {}
  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Unbalanced annotation brackets inside an utterance.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// Bundle file does not follow the binary layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public FormatError {
 public:
  TruncationError(const std::string &what, std::size_t expected,
                  std::size_t actual)
      : FormatError(what), expected_(expected), actual_(actual) {}
  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Shape or width disagreement between two operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a precondition (single class, NaN, missing part, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace adfuse

#endif  // ADFUSE_ERROR_H_
