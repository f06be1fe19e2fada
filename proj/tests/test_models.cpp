// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mtlab/model.hpp"

using namespace mtlab;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Tensor toy_audio(Rng& rng) { return random_tensor({1, 256}, rng); }
Tensor toy_video(Rng& rng) { return random_tensor({4, 1, 12, 12}, rng); }

ModelConfig audio_only_toy() {
  ModelConfig cfg = toy_preset();
  cfg.fusion = FusionMode::AudioOnly;
  cfg.visual.reset();
  return cfg;
}

WeightingMode dynamic_two() {
  return DynamicWeighting{BalancingFactors::zeros(2), std::nullopt};
}

std::filesystem::path temp_file(const std::string& stem) {
  return std::filesystem::temp_directory_path() /
         (stem + "-" + std::to_string(::getpid()) + ".bin");
}

}  // namespace

TEST_CASE("full preset carries the published architecture constants") {
  ModelConfig cfg = full_preset();
  REQUIRE(cfg.speech.has_value());
  CHECK(cfg.speech->input_length == 96000);
  REQUIRE(cfg.speech->stages.size() == 2);
  CHECK(cfg.speech->stages[0].first.filters == 40);
  CHECK(cfg.speech->stages[0].first.kernel == 80);
  CHECK(cfg.speech->stages[0].second.size == 2);
  CHECK(cfg.speech->stages[0].second.axis == PoolAxis::Time);
  CHECK(cfg.speech->stages[1].first.filters == 40);
  CHECK(cfg.speech->stages[1].first.kernel == 4000);
  CHECK(cfg.speech->stages[1].second.size == 10);
  CHECK(cfg.speech->stages[1].second.axis == PoolAxis::Channels);

  REQUIRE(cfg.visual.has_value());
  CHECK(cfg.visual->height == 96);
  CHECK(cfg.visual->width == 96);
  CHECK(cfg.visual->stem.filters == 64);
  CHECK(cfg.visual->stem.kernel == 7);
  CHECK(cfg.visual->stem.pool == 3);
  CHECK(cfg.visual->blocks.size() == 4);

  CHECK(cfg.recurrent.layers == 2);
  CHECK(cfg.recurrent.cells == 256);
  CHECK(cfg.dropout_rate == 0.5);
  REQUIRE(cfg.heads.size() == 2);
  CHECK(cfg.heads[0].task == "emotion");
  CHECK(cfg.heads[0].classes == 4);
  CHECK(cfg.heads[1].task == "gender");
  CHECK(cfg.heads[1].classes == 2);

  // the whole chain validates structurally
  ShapeChain chain = validate_config(cfg);
  CHECK(chain.visual_step_features == 2048);
  CHECK(chain.audio_step_features == 4);
  CHECK(chain.lstm_input == 2052);
}

TEST_CASE("toy preset mirrors the full topology stage for stage") {
  ModelConfig toy = toy_preset();
  ModelConfig full = full_preset();
  CHECK(toy.speech->stages.size() == full.speech->stages.size());
  CHECK(!toy.visual->blocks.empty());
  CHECK(!full.visual->blocks.empty());
  CHECK(toy.recurrent.layers == full.recurrent.layers);
  CHECK(toy.heads.size() == full.heads.size());
  for (std::size_t i = 0; i < toy.heads.size(); ++i) {
    CHECK(toy.heads[i].task == full.heads[i].task);
    CHECK(toy.heads[i].classes == full.heads[i].classes);
  }
  CHECK(validate_config(toy).lstm_input == 38);
}

TEST_CASE("invalid chains are rejected with the stage named") {
  ModelConfig cfg = toy_preset();
  cfg.speech->stages[1].first.kernel = 4000;  // larger than the remaining length
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("speech stage 1") != std::string::npos);
  }

  ModelConfig bad_pool = toy_preset();
  bad_pool.visual->stem.pool = 3;  // 10x10 stem output is not divisible by 3
  CHECK_THROWS_AS(validate_config(bad_pool), ConfigError);

  ModelConfig bad_fusion = toy_preset();
  bad_fusion.visual.reset();  // concat fusion with a missing branch
  CHECK_THROWS_AS(validate_config(bad_fusion), ConfigError);

  ModelConfig bad_head = toy_preset();
  bad_head.heads[1].classes = 1;
  CHECK_THROWS_AS(validate_config(bad_head), ConfigError);
}

TEST_CASE("build is deterministic and starts dynamic weights uniform") {
  Rng r1(5), r2(5);
  MultimodalModel a = build_model(toy_preset(), dynamic_two(), r1);
  MultimodalModel b = build_model(toy_preset(), dynamic_two(), r2);
  REQUIRE(a.params.size() == b.params.size());
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    CHECK(a.params[i].name == b.params[i].name);
    CHECK(a.params[i].value.values() == b.params[i].value.values());
  }

  TaskWeights w = a.current_weights();
  CHECK(w.w[0] == 0.5);
  CHECK(w.w[1] == 0.5);
  CHECK(a.lambda_index() >= 0);
  CHECK(a.params.back().name == "lambda");
}

TEST_CASE("forward emits normalized log-distributions per head") {
  Rng rng(6);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), rng);
  for (int it = 0; it < 100; ++it) {
    std::vector<Tensor> outs = eval_forward(model, toy_audio(rng), toy_video(rng));
    REQUIRE(outs.size() == 2);
    CHECK(outs[0].shape() == Shape{4});
    CHECK(outs[1].shape() == Shape{2});
    for (const Tensor& o : outs)
      CHECK(std::abs(o.values().array().exp().sum() - 1.0) < 1e-10);
  }
}

TEST_CASE("eval forward is deterministic") {
  Rng rng(7);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), rng);
  Tensor audio = toy_audio(rng), video = toy_video(rng);
  std::vector<Tensor> a = eval_forward(model, audio, video);
  std::vector<Tensor> b = eval_forward(model, audio, video);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].values() == b[i].values());
}

TEST_CASE("audio-only models ignore the video tensor entirely") {
  Rng rng(8);
  MultimodalModel model = build_model(audio_only_toy(), dynamic_two(), rng);
  Tensor audio = toy_audio(rng);
  std::vector<Tensor> base = eval_forward(model, audio, toy_video(rng));
  std::vector<Tensor> perturbed = eval_forward(model, audio, toy_video(rng));
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i].values() == perturbed[i].values());
}

TEST_CASE("mean-over-steps head input is a working alternative to last-step") {
  Rng rng(31);
  ModelConfig mean_cfg = toy_preset();
  mean_cfg.head_input = HeadInput::MeanOverSteps;

  Rng b1(32), b2(32);
  MultimodalModel last_model = build_model(toy_preset(), dynamic_two(), b1);
  MultimodalModel mean_model = build_model(mean_cfg, dynamic_two(), b2);

  Tensor audio = toy_audio(rng), video = toy_video(rng);
  std::vector<Tensor> from_last = eval_forward(last_model, audio, video);
  std::vector<Tensor> from_mean = eval_forward(mean_model, audio, video);
  for (const Tensor& o : from_mean)
    CHECK(std::abs(o.values().array().exp().sum() - 1.0) < 1e-10);
  // same parameters, different readout
  CHECK(from_last[0].values() != from_mean[0].values());
}

TEST_CASE("missing required modality raises an input error") {
  Rng rng(9);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), rng);
  CHECK_THROWS_AS(eval_forward(model, Tensor({0}), toy_video(rng)), InputError);
  CHECK_THROWS_AS(eval_forward(model, toy_audio(rng), Tensor({0})), InputError);
}

TEST_CASE("toy forward and backward complete fast") {
  Rng rng(10);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), rng);
  Tensor audio = toy_audio(rng), video = toy_video(rng);

  const auto start = std::chrono::steady_clock::now();
  Tape tape;
  BoundParams p = bind_params(model, &tape);
  Rng fwd(1);
  std::vector<Tensor> outs = forward(model, p, audio, video, RunMode::Train, fwd);
  Tensor joint = joint_loss(p.lambda, {nll(outs[0], 0), nll(outs[1], 1)});
  tape.backward(joint);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 100);
}

TEST_CASE("toy model end-to-end gradient check") {
  Rng rng(11);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), rng);
  GradCheckReport report = model_grad_check(model, toy_audio(rng), toy_video(rng),
                                            {2, 1}, 20, 1e-6, 1e-4, rng);
  CHECK(report.max_rel_err < 1e-4);
  CHECK(report.offenders.empty());
}

TEST_CASE("checkpoint round trip is bitwise exact") {
  Rng rng(12);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), rng);
  const auto path = temp_file("mtlab-ckpt");

  save_checkpoint(model, path);
  MultimodalModel reloaded = build_model(toy_preset(), dynamic_two(), rng);
  load_checkpoint(reloaded, path);
  for (std::size_t i = 0; i < model.params.size(); ++i)
    CHECK(model.params[i].value.values() == reloaded.params[i].value.values());

  // byte-level determinism of the file itself
  save_checkpoint(model, path);
  std::ifstream f1(path, std::ios::binary);
  std::string bytes1((std::istreambuf_iterator<char>(f1)), {});
  save_checkpoint(model, path);
  std::ifstream f2(path, std::ios::binary);
  std::string bytes2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(bytes1 == bytes2);

  std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected with an offset") {
  Rng rng(13);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), rng);
  const auto path = temp_file("mtlab-ckpt-bad");
  save_checkpoint(model, path);

  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.write("XXXXXXXX", 8);
  }
  MultimodalModel victim = build_model(toy_preset(), dynamic_two(), rng);
  try {
    load_checkpoint(victim, path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }

  // truncation
  save_checkpoint(model, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);
  CHECK_THROWS_AS(load_checkpoint(victim, path), FormatError);

  std::filesystem::remove(path);
}
