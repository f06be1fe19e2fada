// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/gradcheck.hpp"

#include <cmath>

namespace mtlab {

namespace {

double eval_scalar(const ScalarFn& f, const Tensor& point) {
  Tape scratch;
  const Tensor y = f(scratch, point);
  if (!y.is_scalar())
    throw ArgumentError("finite_diff_check needs a scalar-valued function");
  const double v = y.item();
  if (!std::isfinite(v))
    throw NumericError("finite_diff_check: function value is not finite");
  return v;
}

}  // namespace

double finite_diff_check(const ScalarFn& f, const Tensor& point, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("finite_diff_check eps must be positive");

  Tape tape;
  Tensor x = tape.watch(point);
  const Tensor y = f(tape, x);
  if (!y.is_scalar())
    throw ArgumentError("finite_diff_check needs a scalar-valued function");
  if (!std::isfinite(y.item()))
    throw NumericError("finite_diff_check: function value is not finite");
  const Tensor analytic = tape.backward(y).at(x);

  double worst = 0.0;
  Tensor probe = point.detached();
  for (Index i = 0; i < point.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double hi = eval_scalar(f, probe);
    probe[i] = saved - eps;
    const double lo = eval_scalar(f, probe);
    probe[i] = saved;

    const double numeric = (hi - lo) / (2.0 * eps);
    const double a = analytic[i];
    const double err =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace mtlab
