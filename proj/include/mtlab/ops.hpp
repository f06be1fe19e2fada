// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable tensor primitives. Each function computes its value
// eagerly and, when any input is tape-tracked, records the matching
// gradient rule on that tape. Inputs on different tapes are an error;
// untracked inputs act as constants.

#pragma once

#include <vector>

#include "mtlab/tape.hpp"
#include "mtlab/tensor.hpp"

namespace mtlab {

enum class PoolMode { Max, Avg };
enum class Activation { Relu, Tanh, Sigmoid };

// [m x k] * [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);

// Valid (no padding) cross-correlation. Input [C x L] with kernels
// [O x C x K] and one stride, or input [C x H x W] with kernels
// [O x C x Kh x Kw] and one stride per spatial axis. Output spatial
// size is floor((in - k) / stride) + 1.
Tensor conv(const Tensor& input, const Tensor& kernels,
            const std::vector<Index>& stride);

// Non-overlapping windows of `size` along `axis`, reduced by max or
// mean. The axis length must divide exactly; there is no implicit
// padding. Max pooling routes gradient to the argmax positions only.
Tensor pool(const Tensor& input, Index size, Index axis, PoolMode mode);

Tensor activation(const Tensor& input, Activation kind);

// Joins two tensors along `axis`; all other axes must agree.
Tensor concat(const Tensor& a, const Tensor& b, Index axis);

// Numerically stable (max-shifted) log-softmax over a rank-1 tensor.
Tensor log_softmax(const Tensor& logits);

// Negative log-likelihood of `target` under rank-1 log-probabilities.
Tensor nll(const Tensor& log_probs, Index target);

// Elementwise arithmetic on identically shaped tensors.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor exp(const Tensor& a);

// Sum of all elements, as a scalar.
Tensor sum(const Tensor& a);

// Contiguous slice of `length` entries starting at `start` along `axis`.
Tensor narrow(const Tensor& a, Index axis, Index start, Index length);

// Zero padding of `before`/`after` entries along `axis`.
Tensor pad(const Tensor& a, Index axis, Index before, Index after);

// Same data, new shape of equal size.
Tensor reshape(const Tensor& a, Shape shape);

}  // namespace mtlab
