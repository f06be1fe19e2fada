// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/init.hpp"

#include <cmath>

namespace mtlab {

double glorot_bound(Index fan_in, Index fan_out) {
  if (fan_in < 1 || fan_out < 1)
    throw ArgumentError("glorot_init fans must be at least 1, got " +
                        std::to_string(fan_in) + " and " + std::to_string(fan_out));
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor glorot_init(Index fan_in, Index fan_out, Shape shape, Rng& rng) {
  const double b = glorot_bound(fan_in, fan_out);
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(-b, b);
  return t;
}

}  // namespace mtlab
