// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/layers.hpp"

namespace mtlab {

Tensor dense(const Tensor& weights, const Tensor& input, const Tensor& bias) {
  if (input.rank() != 1)
    throw ShapeError("dense expects a rank-1 input, got " + shape_str(input.shape()));
  const Index m = weights.dim(0), n = weights.dim(1);
  Tensor out = reshape(matmul(weights, reshape(input, {n, 1})), {m});
  return add(out, bias);
}

LstmLayer make_lstm_layer(Index input_size, Index hidden_size, Rng& rng) {
  if (input_size < 1 || hidden_size < 1)
    throw ArgumentError("lstm sizes must be positive");
  LstmLayer layer;
  layer.input_size = input_size;
  layer.hidden_size = hidden_size;
  layer.w_input = glorot_init(input_size, hidden_size, {4 * hidden_size, input_size}, rng);
  layer.w_hidden = glorot_init(hidden_size, hidden_size, {4 * hidden_size, hidden_size}, rng);
  layer.bias = Tensor({4 * hidden_size});
  for (Index i = hidden_size; i < 2 * hidden_size; ++i) layer.bias[i] = 1.0;
  return layer;
}

LstmResult lstm_forward(const LstmLayer& layer, const std::vector<Tensor>& sequence,
                        const Tensor& h0, const Tensor& c0) {
  const Index hidden = layer.hidden_size;
  if (h0.shape() != Shape{hidden} || c0.shape() != Shape{hidden})
    throw ShapeError("lstm state size mismatch: expected [" + std::to_string(hidden) +
                     "], got " + shape_str(h0.shape()) + " and " + shape_str(c0.shape()));

  LstmResult result;
  result.h = h0;
  result.c = c0;
  result.outputs.reserve(sequence.size());

  for (const Tensor& x : sequence) {
    if (x.shape() != Shape{layer.input_size})
      throw ShapeError("lstm step of shape " + shape_str(x.shape()) +
                       " does not match input size " + std::to_string(layer.input_size));

    Tensor gates = add(dense(layer.w_input, x, layer.bias),
                       reshape(matmul(layer.w_hidden, reshape(result.h, {hidden, 1})),
                               {4 * hidden}));
    Tensor in_gate = activation(narrow(gates, 0, 0, hidden), Activation::Sigmoid);
    Tensor forget_gate = activation(narrow(gates, 0, hidden, hidden), Activation::Sigmoid);
    Tensor candidate = activation(narrow(gates, 0, 2 * hidden, hidden), Activation::Tanh);
    Tensor out_gate = activation(narrow(gates, 0, 3 * hidden, hidden), Activation::Sigmoid);

    result.c = add(mul(forget_gate, result.c), mul(in_gate, candidate));
    result.h = mul(out_gate, activation(result.c, Activation::Tanh));
    result.outputs.push_back(result.h);
  }
  return result;
}

BottleneckBlock make_bottleneck(Index in_channels, Index mid_channels,
                                Index out_channels, Rng& rng) {
  if (in_channels < 1 || mid_channels < 1 || out_channels < 1)
    throw ArgumentError("bottleneck widths must be positive");
  BottleneckBlock block;
  block.in_channels = in_channels;
  block.mid_channels = mid_channels;
  block.out_channels = out_channels;
  block.conv_reduce =
      glorot_init(in_channels, mid_channels, {mid_channels, in_channels, 1, 1}, rng);
  block.conv_spatial = glorot_init(mid_channels * 9, mid_channels * 9,
                                   {mid_channels, mid_channels, 3, 3}, rng);
  block.conv_expand =
      glorot_init(mid_channels, out_channels, {out_channels, mid_channels, 1, 1}, rng);
  if (in_channels != out_channels)
    block.projection =
        glorot_init(in_channels, out_channels, {out_channels, in_channels, 1, 1}, rng);
  return block;
}

Tensor bottleneck_forward(const BottleneckBlock& block, const Tensor& input) {
  if (input.rank() != 3 || input.dim(0) != block.in_channels)
    throw ShapeError("bottleneck expects [" + std::to_string(block.in_channels) +
                     " x H x W], got " + shape_str(input.shape()));

  Tensor h = activation(conv(input, block.conv_reduce, {1, 1}), Activation::Relu);
  h = pad(pad(h, 1, 1, 1), 2, 1, 1);
  h = activation(conv(h, block.conv_spatial, {1, 1}), Activation::Relu);
  h = conv(h, block.conv_expand, {1, 1});

  Tensor skip = block.projection ? conv(input, *block.projection, {1, 1}) : input;
  return activation(add(h, skip), Activation::Relu);
}

Tensor dropout_apply(const Tensor& input, const DropoutSpec& spec, Rng& rng) {
  if (spec.rate < 0.0 || spec.rate >= 1.0)
    throw ArgumentError("dropout rate must lie in [0, 1), got " +
                        std::to_string(spec.rate));
  if (!spec.train || spec.rate == 0.0) return input;

  Tensor mask(input.shape());
  const double keep_scale = 1.0 / (1.0 - spec.rate);
  for (Index i = 0; i < mask.size(); ++i)
    mask[i] = rng.uniform() < spec.rate ? 0.0 : keep_scale;
  return mul(input, mask);
}

}  // namespace mtlab
