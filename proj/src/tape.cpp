// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/tape.hpp"

#include <cassert>

namespace mtlab {

Tensor GradientMap::at(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(shapes_.size()))
    throw ArgumentError("gradient requested for unknown node " + std::to_string(id));
  const auto i = static_cast<std::size_t>(id);
  if (!present_[i]) return Tensor::zeros(shapes_[i]);
  return Tensor(shapes_[i], grads_[i]);
}

Tensor GradientMap::at(const Tensor& t) const {
  if (!t.on_tape())
    throw ArgumentError("gradient requested for a tensor that is not on the tape");
  return at(t.node());
}

Tensor Tape::watch(const Tensor& t) {
  Tensor tracked = t.detached();
  tracked.attach(this, make_node(t.shape()));
  return tracked;
}

NodeId Tape::make_node(const Shape& shape) {
  shapes_.push_back(shape);
  return frontier_++;
}

void Tape::record(const char* op, std::vector<NodeId> inputs, NodeId output,
                  BackwardFn fn) {
  for (NodeId in : inputs) assert(in < output);
  records_.push_back(Record{op, std::move(inputs), output, std::move(fn)});
}

GradientMap Tape::backward(const Tensor& output) const {
  if (!output.on_tape() || output.tape() != this)
    throw ArgumentError("backward target is not on this tape");
  if (!output.is_scalar())
    throw ArgumentError("backward target must be scalar, got " +
                        shape_str(output.shape()));

  const auto n = static_cast<std::size_t>(frontier_);
  std::vector<Eigen::VectorXd> grads(n);
  std::vector<char> present(n, 0);

  auto ensure = [&](NodeId id) -> Eigen::VectorXd* {
    const auto i = static_cast<std::size_t>(id);
    if (!present[i]) {
      grads[i] = Eigen::VectorXd::Zero(shape_size(shapes_[i]));
      present[i] = 1;
    }
    return &grads[i];
  };

  *ensure(output.node()) = Eigen::VectorXd::Constant(1, 1.0);

  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    const Record& r = *it;
    const auto out = static_cast<std::size_t>(r.output);
    if (!present[out]) continue;
    std::vector<Eigen::VectorXd*> grad_inputs;
    grad_inputs.reserve(r.inputs.size());
    for (NodeId in : r.inputs)
      grad_inputs.push_back(in == kNoNode ? nullptr : ensure(in));
    r.backward(grads[out], grad_inputs);
  }

  return GradientMap(shapes_, std::move(grads), std::move(present));
}

GradientMap backward(const Tensor& output) {
  if (!output.on_tape())
    throw ArgumentError("backward target is not on any tape");
  return output.tape()->backward(output);
}

}  // namespace mtlab
