// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Declarative multimodal architecture: a strided-conv speech branch and a
// residual visual branch each emit one feature vector per time step, the
// steps are fused (by concatenation, or taken from a single branch), a
// stacked LSTM reads the fused sequence, and one classification head per
// task maps its output to log-probabilities.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtlab/joint_loss.hpp"
#include "mtlab/layers.hpp"
#include "mtlab/rng.hpp"

namespace mtlab {

struct ConvStage {
  Index filters = 0;
  Index kernel = 0;
  Index stride = 1;
};

enum class PoolAxis { Time, Channels };

struct PoolStage {
  Index size = 1;
  PoolAxis axis = PoolAxis::Time;
  PoolMode mode = PoolMode::Max;
};

struct SpeechConfig {
  Index in_channels = 1;
  Index input_length = 0;
  std::vector<std::pair<ConvStage, PoolStage>> stages;
};

struct VisualStem {
  Index filters = 0;
  Index kernel = 0;
  Index stride = 1;
  Index pool = 1;  // max pool, both spatial axes
};

struct BottleneckSpec {
  Index mid = 0;
  Index out = 0;
};

struct VisualConfig {
  Index in_channels = 0;
  Index height = 0;
  Index width = 0;
  VisualStem stem;
  std::vector<BottleneckSpec> blocks;
  // the branch always ends in global average pooling
};

enum class FusionMode { AudioOnly, VideoOnly, Concat };

struct RecurrentSpec {
  Index layers = 0;
  Index cells = 0;
};

struct HeadSpec {
  std::string task;
  Index classes = 0;
};

enum class HeadInput { LastStep, MeanOverSteps };

struct ModelConfig {
  std::optional<SpeechConfig> speech;
  std::optional<VisualConfig> visual;
  FusionMode fusion = FusionMode::Concat;
  Index time_steps = 0;  // frames per sample; both branches emit this many steps
  RecurrentSpec recurrent;
  std::vector<HeadSpec> heads;
  double dropout_rate = 0.5;
  HeadInput head_input = HeadInput::LastStep;
};

// Per-step feature widths implied by a config, computed by walking the
// stage chain.
struct ShapeChain {
  Index audio_step_features = 0;   // 0 when the speech branch is absent
  Index visual_step_features = 0;  // 0 when the visual branch is absent
  Index lstm_input = 0;
};

// Walks every stage and throws ConfigError naming the first stage that
// does not chain (kernel larger than its input, pool that does not
// divide, sequence length not divisible by time_steps, ...).
ShapeChain validate_config(const ModelConfig& config);

// Full-scale preset: 16 kHz x 6 s audio (96000 samples) through 40
// filters of kernel 80 then pool 2, 40 filters of kernel 4000 then pool
// 10 across channels; 96x96 video through a 64-map 7x7 stem with pool 3
// and four bottleneck groups up to 2048 channels with global average
// pooling; a 2-layer 256-cell LSTM; dropout 0.5; 4-class and 2-class
// heads. Validated structurally; far too large to train here.
ModelConfig full_preset();

// Same topology at desk scale; the test and benchmark default.
ModelConfig toy_preset();

struct NamedParam {
  std::string name;
  Tensor value;
};

struct MultimodalModel {
  ModelConfig config;
  WeightingMode weighting;
  std::vector<NamedParam> params;  // flat registry, fixed build order

  bool dynamic() const { return std::holds_alternative<DynamicWeighting>(weighting); }
  Index lambda_index() const;       // index into params, -1 when static
  TaskWeights current_weights() const;
};

// Glorot-initializes every weight from `rng`; lambda starts at the
// dynamic init (zeros by default) so initial task weights are uniform.
MultimodalModel build_model(const ModelConfig& config, const WeightingMode& weighting,
                            Rng& rng);

// Parameters arranged for a forward pass. When bound to a tape every
// registry tensor is watched, in registry order.
struct BoundParams {
  std::vector<Tensor> flat;  // aligned with MultimodalModel::params
  std::vector<Tensor> speech_kernels;
  Tensor visual_stem;
  std::vector<BottleneckBlock> blocks;
  std::vector<LstmLayer> lstm;
  struct Head {
    Tensor weight;
    Tensor bias;
  };
  std::vector<Head> heads;
  bool has_lambda = false;
  Tensor lambda;
};

BoundParams bind_params(const MultimodalModel& model, Tape* tape);

enum class RunMode { Train, Eval };

// One sample through the network: one log-probability vector per head,
// each exponentiating to a distribution. Unused modalities are ignored;
// missing required modalities raise InputError. Eval mode is
// deterministic (dropout off).
std::vector<Tensor> forward(const MultimodalModel& model, const BoundParams& params,
                            const Tensor& audio, const Tensor& video, RunMode mode,
                            Rng& rng);

// Eval-mode convenience: binds off-tape and runs one forward.
std::vector<Tensor> eval_forward(const MultimodalModel& model, const Tensor& audio,
                                 const Tensor& video);

// Checkpoints: magic "MTLCKPT1", then each parameter as (name, shape,
// little-endian f64 payload), in registry order. Round trips bitwise.
void save_checkpoint(const MultimodalModel& model, const std::filesystem::path& path);
void load_checkpoint(MultimodalModel& model, const std::filesystem::path& path);

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::vector<std::string> offenders;  // parameter names past tolerance
};

// Central-difference check of the dynamic joint loss over `probes`
// randomly sampled parameter elements plus every lambda entry. Errors are
// measured relative to the max-norm of the probed analytic gradient.
GradCheckReport model_grad_check(const MultimodalModel& model, const Tensor& audio,
                                 const Tensor& video,
                                 const std::vector<Index>& targets, int probes,
                                 double eps, double tolerance, Rng& rng);

}  // namespace mtlab
