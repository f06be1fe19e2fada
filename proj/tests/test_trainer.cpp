// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <map>

#include "doctest.h"
#include "mtlab/trainer.hpp"

using namespace mtlab;

namespace {

Dataset small_dataset(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.count = n;
  spec.seed = seed;
  return synth_generate(spec);
}

WeightingMode dynamic_two() {
  return DynamicWeighting{BalancingFactors::zeros(2), std::nullopt};
}

WeightingMode static_half() {
  return StaticWeighting{TaskWeights::uniform(2)};
}

TrainConfig quick_config(int epochs, std::uint64_t seed, WeightingMode mode) {
  TrainConfig cfg;
  cfg.weighting = std::move(mode);
  cfg.epochs = epochs;
  cfg.batch_size = 8;
  cfg.seed = seed;
  return cfg;
}

bool records_identical(const EpochRecord& a, const EpochRecord& b) {
  return a.epoch == b.epoch && a.train_joint_mean == b.train_joint_mean &&
         a.train_joint_sum == b.train_joint_sum &&
         a.val_joint_mean == b.val_joint_mean && a.val_joint_sum == b.val_joint_sum &&
         a.train_task_mean == b.train_task_mean && a.val_task_mean == b.val_task_mean &&
         a.weights == b.weights;
}

}  // namespace

TEST_CASE("static half-half step reports the arithmetic mean") {
  Dataset ds = small_dataset(16, 1);
  Rng build(2);
  MultimodalModel model = build_model(toy_preset(), static_half(), build);
  Optimizer opt(OptimizerSpec{}, model, std::nullopt);
  Rng rng(3);
  JointLossRecord rec = optimize_step(model, ds, {0, 1, 2, 3}, opt, rng);
  CHECK(rec.weights[0] == 0.5);
  CHECK(rec.weights[1] == 0.5);
  CHECK(rec.joint == (rec.task_losses[0] + rec.task_losses[1]) / 2.0);
}

TEST_CASE("first dynamic step moves weight toward the smaller loss") {
  Dataset ds = small_dataset(32, 4);
  Rng build(5);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
  Optimizer opt(OptimizerSpec{}, model, std::nullopt);
  Rng rng(6);
  JointLossRecord rec =
      optimize_step(model, ds, {0, 1, 2, 3, 4, 5, 6, 7}, opt, rng);
  CHECK(rec.weights[0] == 0.5);  // weights in effect for the step
  REQUIRE(rec.task_losses[0] != rec.task_losses[1]);

  const std::size_t smaller = rec.task_losses[0] < rec.task_losses[1] ? 0 : 1;
  TaskWeights after = model.current_weights();
  CHECK(after.w[static_cast<Index>(smaller)] > 0.5);
  CHECK(std::abs(after.w.sum() - 1.0) < 1e-12);

  // the record's joint always equals dot(weights, losses)
  const double dot = rec.weights[0] * rec.task_losses[0] +
                     rec.weights[1] * rec.task_losses[1];
  CHECK(std::abs(rec.joint - dot) < 1e-12);
}

TEST_CASE("zero learning rate is a null update") {
  Dataset ds = small_dataset(16, 7);
  Rng build(8);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
  std::vector<Eigen::VectorXd> before;
  for (const NamedParam& p : model.params) before.push_back(p.value.values());

  OptimizerSpec spec;
  spec.learning_rate = 0.0;
  Optimizer opt(spec, model, std::nullopt);
  Rng r1(9);
  JointLossRecord first = optimize_step(model, ds, {0, 1, 2}, opt, r1);
  for (std::size_t i = 0; i < model.params.size(); ++i)
    CHECK(model.params[i].value.values() == before[i]);

  Rng r2(9);
  JointLossRecord second = optimize_step(model, ds, {0, 1, 2}, opt, r2);
  CHECK(first.joint == second.joint);
  CHECK(first.task_losses == second.task_losses);
}

TEST_CASE("untrained heads sit near the uniform-prediction loss") {
  Dataset ds = small_dataset(64, 10);
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  double emo = 0.0, gen = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    Rng build(100 + static_cast<std::uint64_t>(s));
    MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
    EvalResult r = evaluate(model, ds, all, model.current_weights());
    emo += r.task_mean[0];
    gen += r.task_mean[1];
  }
  CHECK(std::abs(emo / seeds - std::log(4.0)) < 0.15);
  CHECK(std::abs(gen / seeds - std::log(2.0)) < 0.15);
}

TEST_CASE("evaluate is deterministic and sums match means") {
  Dataset ds = small_dataset(20, 11);
  std::vector<std::size_t> idx{0, 3, 5, 7, 11, 13};
  Rng build(12);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);

  EvalResult a = evaluate(model, ds, idx, model.current_weights());
  EvalResult b = evaluate(model, ds, idx, model.current_weights());
  CHECK(a.joint_mean == b.joint_mean);
  CHECK(a.task_sum == b.task_sum);
  for (std::size_t k = 0; k < a.task_mean.size(); ++k)
    CHECK(std::abs(a.task_sum[k] - a.task_mean[k] * static_cast<double>(idx.size())) <
          1e-9);

  CHECK_THROWS_AS(evaluate(model, ds, {}, model.current_weights()), ArgumentError);
}

TEST_CASE("train validates its contract and replays deterministically") {
  Dataset ds = small_dataset(40, 13);
  Splits splits = split_622(ds, 21);

  {
    Rng build(14);
    MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
    CHECK_THROWS_AS(train(model, ds, splits, quick_config(0, 1, dynamic_two())),
                    ArgumentError);
  }

  auto run_once = [&](std::uint64_t seed) {
    Rng build(15);
    MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
    return train(model, ds, splits, quick_config(3, seed, dynamic_two()));
  };
  TrainResult a = run_once(77);
  TrainResult b = run_once(77);
  REQUIRE(a.curve.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(records_identical(a.curve[i], b.curve[i]));
  CHECK(a.final_weights.w == b.final_weights.w);

  // row one of the record carries the uniform initialization
  CHECK(a.curve[0].weights[0] == 0.5);
  CHECK(a.curve[0].weights[1] == 0.5);

  // one-epoch run yields exactly one record
  Rng build(16);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
  TrainResult one = train(model, ds, splits, quick_config(1, 5, dynamic_two()));
  CHECK(one.curve.size() == 1);
}

TEST_CASE("epoch records stay internally consistent") {
  Dataset ds = small_dataset(40, 17);
  Splits splits = split_622(ds, 22);
  Rng build(18);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
  TrainResult r = train(model, ds, splits, quick_config(3, 9, dynamic_two()));
  for (const EpochRecord& rec : r.curve) {
    double train_joint = 0.0, val_joint = 0.0;
    for (std::size_t k = 0; k < rec.weights.size(); ++k) {
      train_joint += rec.weights[k] * rec.train_task_mean[k];
      val_joint += rec.weights[k] * rec.val_task_mean[k];
    }
    CHECK(std::abs(train_joint - rec.train_joint_mean) < 1e-10);
    CHECK(std::abs(val_joint - rec.val_joint_mean) < 1e-10);
    CHECK(std::abs(rec.weights[0] + rec.weights[1] - 1.0) < 1e-12);
  }
}

TEST_CASE("one optimizer step touches every stage of the network") {
  Dataset ds = small_dataset(16, 19);
  Rng build(20);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
  std::vector<Eigen::VectorXd> before;
  for (const NamedParam& p : model.params) before.push_back(p.value.values());

  Optimizer opt(OptimizerSpec{}, model, std::nullopt);
  Rng rng(21);
  optimize_step(model, ds, {0, 1, 2, 3}, opt, rng);

  std::map<std::string, bool> stage_changed;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const std::string& name = model.params[i].name;
    const std::string stage = name.substr(0, name.find('.'));
    stage_changed[stage] |= model.params[i].value.values() != before[i];
  }
  for (const char* stage : {"speech", "visual", "lstm", "head", "lambda"}) {
    INFO("stage ", stage);
    CHECK(stage_changed[stage]);
  }
}

TEST_CASE("training reduces the training joint loss") {
  Dataset ds = small_dataset(120, 23);
  Splits splits = split_622(ds, 23);
  Rng build(24);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
  TrainResult r = train(model, ds, splits, quick_config(10, 31, dynamic_two()));
  CHECK(r.curve.back().train_joint_mean < r.curve.front().train_joint_mean);
}

TEST_CASE("numeric blowups carry epoch and batch context") {
  Dataset ds = small_dataset(24, 25);
  Splits splits = split_622(ds, 25);
  Rng build(26);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);

  TrainConfig cfg = quick_config(1, 3, dynamic_two());
  cfg.optimizer.kind = OptimizerKind::Sgd;
  cfg.optimizer.learning_rate = 1e300;
  try {
    train(model, ds, splits, cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("run_suite produces the four-row comparison") {
  Dataset ds = small_dataset(60, 27);
  Splits splits = split_622(ds, 27);
  SuiteOptions options;
  options.epochs = 2;

  ExperimentReport report = run_suite(ds, splits, 5, options);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].name == "UM-dynamic-A");
  CHECK(report.rows[0].uses_audio);
  CHECK(!report.rows[0].uses_video);
  CHECK(report.rows[1].name == "UM-dynamic-V");
  CHECK(!report.rows[1].uses_audio);
  CHECK(report.rows[1].uses_video);
  CHECK(report.rows[2].name == "MM-static");
  CHECK(report.rows[2].uses_audio);
  CHECK(report.rows[2].uses_video);
  CHECK(report.rows[3].name == "MM-dynamic");

  // the static baseline holds (0.5, 0.5) at every epoch
  for (const EpochRecord& rec : report.rows[2].curve) {
    CHECK(rec.weights[0] == 0.5);
    CHECK(rec.weights[1] == 0.5);
  }
  CHECK(report.rows[2].final_weights[0] == 0.5);

  // dynamic trajectories live on the simplex and start uniform
  for (std::size_t ri : {0u, 1u, 3u}) {
    CHECK(report.rows[ri].curve.front().weights[0] == 0.5);
    for (const EpochRecord& rec : report.rows[ri].curve) {
      CHECK(rec.weights[0] > 0.0);
      CHECK(rec.weights[1] > 0.0);
      CHECK(std::abs(rec.weights[0] + rec.weights[1] - 1.0) < 1e-12);
    }
  }

  // byte-level determinism of the report
  ExperimentReport again = run_suite(ds, splits, 5, options);
  CHECK(report_to_json(report) == report_to_json(again));
}

TEST_CASE("curve CSV bytes are deterministic and carry the fixed header") {
  Dataset ds = small_dataset(30, 28);
  Splits splits = split_622(ds, 28);
  Rng build(29);
  MultimodalModel model = build_model(toy_preset(), dynamic_two(), build);
  TrainResult r = train(model, ds, splits, quick_config(2, 8, dynamic_two()));

  const auto path = std::filesystem::temp_directory_path() /
                    ("mtlab-curve-" + std::to_string(::getpid()) + ".csv");
  write_curve_csv(path, r.curve);
  std::ifstream f1(path);
  std::string text1((std::istreambuf_iterator<char>(f1)), {});
  write_curve_csv(path, r.curve);
  std::ifstream f2(path);
  std::string text2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(text1 == text2);
  CHECK(text1.rfind("epoch,train_joint_mean,train_joint_sum,val_joint_mean,"
                    "val_joint_sum,w_emotion,w_gender,nll_emotion,nll_gender\n",
                    0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), ArgumentError);
}
