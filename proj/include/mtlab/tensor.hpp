// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "mtlab/errors.hpp"

namespace mtlab {

class Tape;

using Index = Eigen::Index;
using NodeId = std::int64_t;
inline constexpr NodeId kNoNode = -1;

using Shape = std::vector<Index>;

std::string shape_str(const Shape& shape);
Index shape_size(const Shape& shape);

// Dense multi-dimensional array of doubles, stored flat in row-major
// order. A rank-0 tensor with one element is a scalar. When a tensor
// participates in differentiation it carries a handle into the Tape
// that recorded it; plain values carry none.
class Tensor {
 public:
  Tensor() : shape_{}, values_(1) { values_[0] = 0.0; }

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    check_dims();
    values_ = Eigen::VectorXd::Zero(shape_size(shape_));
  }

  Tensor(Shape shape, Eigen::VectorXd values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    check_dims();
    if (values_.size() != shape_size(shape_))
      throw ShapeError("tensor " + shape_str(shape_) + " cannot hold " +
                       std::to_string(values_.size()) + " values");
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor full(Shape shape, double v) {
    Tensor t(std::move(shape));
    t.values_.setConstant(v);
    return t;
  }

  static Tensor scalar(double v) {
    Tensor t;
    t.values_[0] = v;
    return t;
  }

  static Tensor row(std::initializer_list<double> xs) {
    Tensor t({static_cast<Index>(xs.size())});
    Index i = 0;
    for (double x : xs) t.values_[i++] = x;
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return values_.size(); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  bool is_scalar() const { return values_.size() == 1; }

  double item() const {
    if (!is_scalar())
      throw ArgumentError("item() on non-scalar tensor " + shape_str(shape_));
    return values_[0];
  }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double operator[](Index i) const { return values_[i]; }
  double& operator[](Index i) { return values_[i]; }

  bool all_finite() const { return values_.allFinite(); }

  // Tape affiliation; set by Tape::watch and by recorded primitives.
  Tape* tape() const { return tape_; }
  NodeId node() const { return node_; }
  bool on_tape() const { return tape_ != nullptr && node_ != kNoNode; }
  void attach(Tape* tape, NodeId node) {
    tape_ = tape;
    node_ = node;
  }
  Tensor detached() const { return Tensor(shape_, values_); }

 private:
  void check_dims() const {
    for (Index d : shape_)
      if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(shape_));
  }

  Shape shape_;
  Eigen::VectorXd values_;
  Tape* tape_ = nullptr;
  NodeId node_ = kNoNode;
};

// Requires every element finite; names the offending primitive otherwise.
void ensure_finite(const Tensor& t, const char* op);

}  // namespace mtlab
