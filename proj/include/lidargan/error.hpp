// Copyright 2026 The LidarGAN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lidargan {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, unknown preset, empty domain, bad scenario id.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf produced by a computation, or an unclamped probability.
class NumericFault : public Error {
 public:
  using Error::Error;
};

/// Loss function returned different values for identical inputs.
class NonDeterministicError : public Error {
 public:
  using Error::Error;
};

/// KITTI buffer whose length is not a multiple of the record size.
class MalformedRecordError : public Error {
 public:
  explicit MalformedRecordError(std::size_t byte_count)
      : Error("malformed KITTI buffer: " + std::to_string(byte_count) +
              " bytes is not a multiple of 16"),
        byte_count_(byte_count) {}

  std::size_t byte_count() const noexcept { return byte_count_; }

 private:
  std::size_t byte_count_;
};

/// Text input that does not follow the documented grammar.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Binary container with a bad header or invalid payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

class OverflowError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lidargan
