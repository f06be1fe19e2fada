// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mtlab/tensor.hpp"

namespace mtlab {

// Gradients produced by one backward pass, keyed by node id. Nodes the
// loss never reached report zero gradients of the right shape.
class GradientMap {
 public:
  GradientMap(std::vector<Shape> shapes, std::vector<Eigen::VectorXd> grads,
              std::vector<char> present)
      : shapes_(std::move(shapes)),
        grads_(std::move(grads)),
        present_(std::move(present)) {}

  bool reached(NodeId id) const {
    return id >= 0 && id < static_cast<NodeId>(present_.size()) &&
           present_[static_cast<std::size_t>(id)];
  }

  Tensor at(NodeId id) const;
  Tensor at(const Tensor& t) const;

 private:
  std::vector<Shape> shapes_;
  std::vector<Eigen::VectorXd> grads_;
  std::vector<char> present_;
};

// Define-by-run record of primitive applications, rebuilt per forward
// pass. Records are topologically ordered by construction: every input
// id is created before the output id that consumes it. Single-threaded;
// a tape and its tensors must not be shared across execution contexts.
class Tape {
 public:
  using BackwardFn =
      std::function<void(const Eigen::VectorXd& grad_out,
                         const std::vector<Eigen::VectorXd*>& grad_inputs)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a value as a differentiable leaf and returns the tracked copy.
  Tensor watch(const Tensor& t);

  // Reverse traversal from a scalar output; visits each record once and
  // accumulates gradients for every reachable node. Seed gradient is 1.
  GradientMap backward(const Tensor& output) const;

  NodeId make_node(const Shape& shape);
  void record(const char* op, std::vector<NodeId> inputs, NodeId output,
              BackwardFn fn);

  std::size_t record_count() const { return records_.size(); }
  NodeId frontier() const { return frontier_; }
  const Shape& node_shape(NodeId id) const {
    return shapes_.at(static_cast<std::size_t>(id));
  }

 private:
  struct Record {
    const char* op;
    std::vector<NodeId> inputs;
    NodeId output;
    BackwardFn backward;
  };

  std::vector<Record> records_;
  std::vector<Shape> shapes_;  // one entry per node id
  NodeId frontier_ = 0;
};

// Free-function spelling of tape.backward(output).
GradientMap backward(const Tensor& output);

}  // namespace mtlab
