// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/tensor.hpp"

namespace mtlab {

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += " x ";
    s += std::to_string(shape[i]);
  }
  s += "]";
  return s;
}

Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

void ensure_finite(const Tensor& t, const char* op) {
  if (!t.all_finite())
    throw NumericError(std::string(op) + " produced a non-finite value");
}

}  // namespace mtlab
