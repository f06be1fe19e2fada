// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mtlab {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible tensor shapes (mismatched matmul dims, bad concat axes, ...).
struct ShapeError : Error {
  using Error::Error;
};

// Invalid argument values (zero stride, empty input where one is required).
struct ArgumentError : Error {
  using Error::Error;
};

// Out-of-range index (class target beyond the logit vector, bad axis).
struct IndexError : Error {
  using Error::Error;
};

// NaN/Inf produced or consumed by a numeric primitive.
struct NumericError : Error {
  using Error::Error;
};

// Malformed on-disk data (dataset files, checkpoints).
struct FormatError : Error {
  using Error::Error;
};

// A model configuration whose stages do not chain.
struct ConfigError : Error {
  using Error::Error;
};

// Missing or incompatible model input.
struct InputError : Error {
  using Error::Error;
};

}  // namespace mtlab
