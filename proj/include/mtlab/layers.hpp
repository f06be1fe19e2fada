// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameterized building blocks: dense affine map, LSTM layer, residual
// bottleneck block, dropout. Layers are plain value types holding their
// parameter tensors; forwards compose the ops primitives, so everything
// differentiates through the tape when the parameters are watched.

#pragma once

#include <optional>
#include <vector>

#include "mtlab/init.hpp"
#include "mtlab/ops.hpp"
#include "mtlab/rng.hpp"

namespace mtlab {

// weights [m x n] applied to a rank-1 input [n], plus bias [m].
Tensor dense(const Tensor& weights, const Tensor& input, const Tensor& bias);

// One LSTM layer. Gate weights are stacked along the first axis in the
// order input, forget, cell, output.
struct LstmLayer {
  Index input_size = 0;
  Index hidden_size = 0;
  Tensor w_input;   // [4H x input_size]
  Tensor w_hidden;  // [4H x H]
  Tensor bias;      // [4H]
};

// Glorot weights; zero biases except the forget-gate block, which starts
// at 1 so early training does not flush cell state.
LstmLayer make_lstm_layer(Index input_size, Index hidden_size, Rng& rng);

struct LstmResult {
  std::vector<Tensor> outputs;  // hidden state per step
  Tensor h;                     // final hidden state
  Tensor c;                     // final cell state
};

// Standard recurrence: sigmoid gates, tanh candidate and output squash.
// An empty sequence returns (no outputs, h0, c0).
LstmResult lstm_forward(const LstmLayer& layer, const std::vector<Tensor>& sequence,
                        const Tensor& h0, const Tensor& c0);

// Residual bottleneck over [C x H x W]: 1x1 reduce, 3x3 (zero-padded to
// preserve the spatial extent), 1x1 expand, plus an identity skip, or a
// 1x1 projection when the channel widths differ. Relu throughout.
struct BottleneckBlock {
  Index in_channels = 0;
  Index mid_channels = 0;
  Index out_channels = 0;
  Tensor conv_reduce;                // [mid x in x 1 x 1]
  Tensor conv_spatial;               // [mid x mid x 3 x 3]
  Tensor conv_expand;                // [out x mid x 1 x 1]
  std::optional<Tensor> projection;  // [out x in x 1 x 1] iff in != out
};

BottleneckBlock make_bottleneck(Index in_channels, Index mid_channels,
                                Index out_channels, Rng& rng);

Tensor bottleneck_forward(const BottleneckBlock& block, const Tensor& input);

struct DropoutSpec {
  double rate = 0.0;  // in [0, 1)
  bool train = false;
};

// Inverted dropout: in train mode each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); eval mode is the identity.
Tensor dropout_apply(const Tensor& input, const DropoutSpec& spec, Rng& rng);

}  // namespace mtlab
