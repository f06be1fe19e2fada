// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Dynamic joint-loss weighting, generalized to K tasks. Unconstrained
// balancing factors pass through a softmax to give task weights on the
// probability simplex; the joint loss is the weighted combination of the
// per-task losses and the factors are trained by gradient descent like
// any other parameter.

#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "mtlab/ops.hpp"

namespace mtlab {

// Learnable balancing factors, one per task. Unconstrained reals.
struct BalancingFactors {
  Eigen::VectorXd lambda;

  static BalancingFactors zeros(Index tasks) {
    return {Eigen::VectorXd::Zero(tasks)};
  }
};

// Point on the probability simplex: strictly positive, sums to 1.
struct TaskWeights {
  Eigen::VectorXd w;

  static TaskWeights uniform(Index tasks) {
    return {Eigen::VectorXd::Constant(tasks, 1.0 / static_cast<double>(tasks))};
  }
};

// softmax(lambda), computed max-shifted.
TaskWeights task_weights(const BalancingFactors& factors);

// Plain-value weighted combination sum_i w_i * L_i.
double joint_loss_value(const TaskWeights& weights, const std::vector<double>& losses);

// Fixed-weight joint loss on the tape; differentiable w.r.t. the losses.
Tensor joint_loss(const TaskWeights& weights, const std::vector<Tensor>& losses);

// Dynamic joint loss: weights come from a rank-1 lambda tensor, so the
// result differentiates w.r.t. both the losses and the balancing factors.
Tensor joint_loss(const Tensor& lambda, const std::vector<Tensor>& losses);

// Closed-form gradient of the joint loss w.r.t. lambda, treating the task
// losses as constants (they do not depend on lambda): w_i * (L_i - L_joint).
// Components always sum to zero.
Eigen::VectorXd grad_lambda(const BalancingFactors& factors,
                            const std::vector<double>& losses);

// One descent step: lambda' = lambda - step_size * grad.
BalancingFactors update_lambda(const BalancingFactors& factors,
                               const Eigen::VectorXd& grad, double step_size);

struct StaticWeighting {
  TaskWeights weights;
};

struct DynamicWeighting {
  BalancingFactors init;                 // training starts here (zeros by default)
  std::optional<double> lambda_lr;       // overrides the optimizer rate for lambda
};

using WeightingMode = std::variant<StaticWeighting, DynamicWeighting>;

// One training step's bookkeeping; joint always equals dot(weights, losses).
struct JointLossRecord {
  std::vector<double> task_losses;  // nats
  std::vector<double> weights;
  double joint = 0.0;               // nats
};

JointLossRecord make_joint_record(const TaskWeights& weights,
                                  const std::vector<double>& losses);

}  // namespace mtlab
