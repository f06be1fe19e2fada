// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Optimization loop and the four-configuration experiment suite: two
// unimodal dynamic runs, the static multimodal baseline, and the dynamic
// multimodal model, trained on identical splits and reported as a
// comparison table plus per-epoch curves.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtlab/data.hpp"
#include "mtlab/model.hpp"

namespace mtlab {

enum class OptimizerKind { Adam, Sgd };

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class Modality { Audio, Video, Multimodal };

struct TrainConfig {
  Modality modality = Modality::Multimodal;
  WeightingMode weighting = DynamicWeighting{BalancingFactors::zeros(2), std::nullopt};
  OptimizerSpec optimizer;
  int epochs = 30;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  std::optional<double> lambda_lr;  // overrides optimizer.learning_rate for lambda
  HeadInput head_input = HeadInput::LastStep;
};

// Restricts a multimodal base config to the requested modality.
ModelConfig apply_modality(ModelConfig base, Modality modality);

// Adam (bias-corrected) or plain SGD over the model's parameter registry.
// Lambda may run at its own learning rate.
class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, const MultimodalModel& model,
            std::optional<double> lambda_lr);

  void step(MultimodalModel& model, const GradientMap& grads,
            const std::vector<Tensor>& watched);

 private:
  OptimizerSpec spec_;
  std::optional<double> lambda_lr_;
  Index lambda_index_ = -1;
  std::vector<Eigen::VectorXd> m_, v_;
  long t_ = 0;
};

// One batch: forward every sample, batch-mean per-task NLLs, weighted
// joint, backward, one optimizer update (lambda included in dynamic
// mode). The returned record holds the weights in effect for this step.
JointLossRecord optimize_step(MultimodalModel& model, const Dataset& dataset,
                              const std::vector<std::size_t>& batch, Optimizer& opt,
                              Rng& rng);

struct EvalResult {
  std::vector<double> task_mean;  // per task, nats
  std::vector<double> task_sum;
  double joint_mean = 0.0;
  double joint_sum = 0.0;
};

// Dropout-off forward over the given samples; exact aggregation, no
// parameter mutation. `weights` only combine the per-task numbers.
EvalResult evaluate(const MultimodalModel& model, const Dataset& dataset,
                    const std::vector<std::size_t>& indices, const TaskWeights& weights);

struct EpochRecord {
  int epoch = 0;                        // 1-based
  double train_joint_mean = 0.0;
  double train_joint_sum = 0.0;
  double val_joint_mean = 0.0;
  double val_joint_sum = 0.0;
  std::vector<double> train_task_mean;  // per task
  std::vector<double> val_task_mean;
  std::vector<double> weights;          // at epoch start; row 1 shows the init
};

struct TrainResult {
  std::vector<EpochRecord> curve;
  TaskWeights final_weights;  // after the last update
  int best_epoch = 0;         // 1-based argmin of val_joint_mean
};

// Epoch loop of optimize_step over seeded shuffles of the train split,
// then evaluation on train and validation. Deterministic per
// (config, seed); numeric failures carry epoch/batch context.
TrainResult train(MultimodalModel& model, const Dataset& dataset, const Splits& splits,
                  const TrainConfig& config);

// Builds a model for the config (modality applied to `base`, weighting
// and seeds from the config) and trains it.
std::pair<MultimodalModel, TrainResult> run_training(const ModelConfig& base,
                                                     const TrainConfig& config,
                                                     const Dataset& dataset,
                                                     const Splits& splits);

struct SuiteOptions {
  ModelConfig base;  // multimodal; unimodal rows strip a branch
  int epochs = 30;
  std::size_t batch_size = 8;
  OptimizerSpec optimizer;
  std::optional<double> lambda_lr;

  SuiteOptions();  // toy_preset base
};

struct ConfigResult {
  std::string name;
  bool uses_audio = false;
  bool uses_video = false;
  std::vector<double> final_weights;
  double final_val_joint_mean = 0.0;
  double final_val_joint_sum = 0.0;
  double best_val_joint_mean = 0.0;
  int best_epoch = 0;
  std::vector<EpochRecord> curve;
};

struct ExperimentReport {
  std::uint64_t train_seed = 0;
  std::vector<ConfigResult> rows;  // UM-dynamic-A, UM-dynamic-V, MM-static, MM-dynamic
};

// Trains the four configurations on identical splits. The static baseline
// uses fixed (0.5, 0.5).
ExperimentReport run_suite(const Dataset& dataset, const Splits& splits,
                           std::uint64_t train_seed, const SuiteOptions& options);

// One CSV per configuration curve, fixed header
// epoch,train_joint_mean,train_joint_sum,val_joint_mean,val_joint_sum,
// w_emotion,w_gender,nll_emotion,nll_gender. Deterministic bytes.
void write_curve_csv(const std::filesystem::path& path,
                     const std::vector<EpochRecord>& curve);

std::string report_to_json(const ExperimentReport& report);
void write_report_json(const std::filesystem::path& path, const ExperimentReport& report);

double median(std::vector<double> values);

}  // namespace mtlab
