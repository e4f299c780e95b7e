// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mhlora {

// Base for every error raised by the library. The CLI maps subclasses onto
// process exit codes (see tools/commands.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class SampleSizeError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent file content. `offset` is the byte position at
// which the problem was detected, or -1 for text formats.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, long long offset = -1)
      : Error(offset >= 0 ? what + " (at byte " + std::to_string(offset) + ")"
                          : what),
        offset_(offset) {}

  long long offset() const noexcept { return offset_; }

 private:
  long long offset_;
};

}  // namespace mhlora
