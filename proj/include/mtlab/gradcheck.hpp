// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "mtlab/ops.hpp"

namespace mtlab {

// A scalar-valued function of one tensor, built from primitives so it can
// run both on and off a tape.
using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;

// Compares backward() against central finite differences at `point`,
// elementwise, and returns the largest relative error
// |a - n| / max(|a|, |n|, 1e-8).
double finite_diff_check(const ScalarFn& f, const Tensor& point, double eps);

}  // namespace mtlab
