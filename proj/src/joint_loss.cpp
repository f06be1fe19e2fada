// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/joint_loss.hpp"

#include <cmath>

namespace mtlab {

namespace {

void check_task_count(std::size_t weights, std::size_t losses) {
  if (weights != losses)
    throw ArgumentError("joint loss over " + std::to_string(weights) +
                        " weights but " + std::to_string(losses) + " losses");
}

}  // namespace

TaskWeights task_weights(const BalancingFactors& factors) {
  if (factors.lambda.size() < 1)
    throw ArgumentError("task_weights needs at least one balancing factor");
  if (!factors.lambda.allFinite())
    throw NumericError("task_weights of non-finite balancing factors");

  const double m = factors.lambda.maxCoeff();
  Eigen::VectorXd e = (factors.lambda.array() - m).exp();
  return TaskWeights{e / e.sum()};
}

double joint_loss_value(const TaskWeights& weights, const std::vector<double>& losses) {
  check_task_count(static_cast<std::size_t>(weights.w.size()), losses.size());
  double joint = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i]))
      throw NumericError("joint loss over a non-finite task loss");
    joint += weights.w[static_cast<Index>(i)] * losses[i];
  }
  return joint;
}

Tensor joint_loss(const TaskWeights& weights, const std::vector<Tensor>& losses) {
  check_task_count(static_cast<std::size_t>(weights.w.size()), losses.size());
  Tensor joint;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!losses[i].is_scalar())
      throw ArgumentError("joint loss expects scalar task losses");
    Tensor term = scale(losses[i], weights.w[static_cast<Index>(i)]);
    joint = i == 0 ? term : add(joint, term);
  }
  return joint;
}

Tensor joint_loss(const Tensor& lambda, const std::vector<Tensor>& losses) {
  if (lambda.rank() != 1)
    throw ShapeError("dynamic joint loss expects rank-1 balancing factors, got " +
                     shape_str(lambda.shape()));
  check_task_count(static_cast<std::size_t>(lambda.size()), losses.size());

  Tensor stacked;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!losses[i].is_scalar())
      throw ArgumentError("joint loss expects scalar task losses");
    Tensor entry = reshape(losses[i], {1});
    stacked = i == 0 ? entry : concat(stacked, entry, 0);
  }
  Tensor weights = exp(log_softmax(lambda));
  return sum(mul(weights, stacked));
}

Eigen::VectorXd grad_lambda(const BalancingFactors& factors,
                            const std::vector<double>& losses) {
  const TaskWeights weights = task_weights(factors);
  const double joint = joint_loss_value(weights, losses);
  Eigen::VectorXd grad(weights.w.size());
  for (Index i = 0; i < grad.size(); ++i)
    grad[i] = weights.w[i] * (losses[static_cast<std::size_t>(i)] - joint);
  return grad;
}

BalancingFactors update_lambda(const BalancingFactors& factors,
                               const Eigen::VectorXd& grad, double step_size) {
  if (!(step_size > 0.0)) throw ArgumentError("update_lambda step size must be positive");
  if (grad.size() != factors.lambda.size())
    throw ArgumentError("update_lambda gradient size mismatch");
  return BalancingFactors{factors.lambda - step_size * grad};
}

JointLossRecord make_joint_record(const TaskWeights& weights,
                                  const std::vector<double>& losses) {
  JointLossRecord rec;
  rec.task_losses = losses;
  rec.weights.assign(weights.w.data(), weights.w.data() + weights.w.size());
  rec.joint = joint_loss_value(weights, losses);
  return rec;
}

}  // namespace mtlab
