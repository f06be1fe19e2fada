// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mtlab/rng.hpp"
#include "mtlab/tensor.hpp"

namespace mtlab {

// Normalized (Glorot) initialization: i.i.d. uniform samples on [-b, b]
// with b = sqrt(6 / (fan_in + fan_out)). Deterministic given the rng.
Tensor glorot_init(Index fan_in, Index fan_out, Shape shape, Rng& rng);

double glorot_bound(Index fan_in, Index fan_out);

}  // namespace mtlab
