// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "mtlab/io.hpp"

namespace mtlab {

namespace {

int label_for(const Sample& sample, const std::string& task) {
  if (task == "emotion") return sample.emotion;
  if (task == "gender") return sample.gender;
  throw ArgumentError("no label source for task '" + task + "'");
}

void check_rates(const OptimizerSpec& spec) {
  if (spec.learning_rate < 0.0 || !std::isfinite(spec.learning_rate))
    throw ArgumentError("learning rate must be finite and >= 0");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ModelConfig apply_modality(ModelConfig base, Modality modality) {
  switch (modality) {
    case Modality::Multimodal:
      base.fusion = FusionMode::Concat;
      break;
    case Modality::Audio:
      base.fusion = FusionMode::AudioOnly;
      base.visual.reset();
      break;
    case Modality::Video:
      base.fusion = FusionMode::VideoOnly;
      base.speech.reset();
      break;
  }
  return base;
}

Optimizer::Optimizer(const OptimizerSpec& spec, const MultimodalModel& model,
                     std::optional<double> lambda_lr)
    : spec_(spec), lambda_lr_(lambda_lr), lambda_index_(model.lambda_index()) {
  check_rates(spec);
  if (lambda_lr_ && (*lambda_lr_ < 0.0 || !std::isfinite(*lambda_lr_)))
    throw ArgumentError("lambda learning rate must be finite and >= 0");
  m_.reserve(model.params.size());
  v_.reserve(model.params.size());
  for (const NamedParam& p : model.params) {
    m_.push_back(Eigen::VectorXd::Zero(p.value.size()));
    v_.push_back(Eigen::VectorXd::Zero(p.value.size()));
  }
}

void Optimizer::step(MultimodalModel& model, const GradientMap& grads,
                     const std::vector<Tensor>& watched) {
  if (watched.size() != model.params.size())
    throw ArgumentError("optimizer bound to a different parameter registry");
  ++t_;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const Eigen::VectorXd g = grads.at(watched[i]).values();
    Eigen::VectorXd& p = model.params[i].value.values();
    const double lr = (static_cast<Index>(i) == lambda_index_ && lambda_lr_)
                          ? *lambda_lr_
                          : spec_.learning_rate;
    if (spec_.kind == OptimizerKind::Sgd) {
      p -= lr * g;
      continue;
    }
    m_[i] = spec_.beta1 * m_[i] + (1.0 - spec_.beta1) * g;
    v_[i] = spec_.beta2 * v_[i] + (1.0 - spec_.beta2) * g.cwiseProduct(g);
    const double mc = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
    const double vc = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
    p -= lr * ((m_[i] / mc).array() /
               ((v_[i] / vc).array().sqrt() + spec_.epsilon))
                  .matrix();
    if (!p.allFinite())
      throw NumericError("optimizer drove parameter '" + model.params[i].name +
                         "' non-finite");
  }
}

JointLossRecord optimize_step(MultimodalModel& model, const Dataset& dataset,
                              const std::vector<std::size_t>& batch, Optimizer& opt,
                              Rng& rng) {
  if (batch.empty()) throw ArgumentError("optimize_step over an empty batch");

  Tape tape;
  BoundParams bound = bind_params(model, &tape);
  const auto tasks = model.config.heads.size();

  std::vector<Tensor> acc(tasks);
  for (std::size_t bi = 0; bi < batch.size(); ++bi) {
    const Sample& s = dataset.samples.at(batch[bi]);
    std::vector<Tensor> outs =
        forward(model, bound, s.audio, s.video, RunMode::Train, rng);
    for (std::size_t k = 0; k < tasks; ++k) {
      Tensor loss = nll(outs[k], label_for(s, model.config.heads[k].task));
      acc[k] = bi == 0 ? loss : add(acc[k], loss);
    }
  }

  std::vector<Tensor> task_losses;
  task_losses.reserve(tasks);
  for (std::size_t k = 0; k < tasks; ++k)
    task_losses.push_back(scale(acc[k], 1.0 / static_cast<double>(batch.size())));

  const TaskWeights weights_now = model.current_weights();
  Tensor joint =
      model.dynamic()
          ? joint_loss(bound.lambda, task_losses)
          : joint_loss(std::get<StaticWeighting>(model.weighting).weights, task_losses);

  GradientMap grads = tape.backward(joint);
  opt.step(model, grads, bound.flat);

  std::vector<double> loss_values;
  for (const Tensor& l : task_losses) loss_values.push_back(l.item());
  JointLossRecord rec = make_joint_record(weights_now, loss_values);
  rec.joint = joint.item();  // as minimized, bit for bit
  return rec;
}

EvalResult evaluate(const MultimodalModel& model, const Dataset& dataset,
                    const std::vector<std::size_t>& indices,
                    const TaskWeights& weights) {
  if (indices.empty()) throw ArgumentError("evaluate over an empty dataset");
  const auto tasks = model.config.heads.size();
  if (static_cast<std::size_t>(weights.w.size()) != tasks)
    throw ArgumentError("evaluate weights do not match the task count");

  EvalResult r;
  r.task_sum.assign(tasks, 0.0);
  BoundParams bound = bind_params(model, nullptr);
  Rng unused(0);
  for (std::size_t idx : indices) {
    const Sample& s = dataset.samples.at(idx);
    std::vector<Tensor> outs =
        forward(model, bound, s.audio, s.video, RunMode::Eval, unused);
    for (std::size_t k = 0; k < tasks; ++k)
      r.task_sum[k] += nll(outs[k], label_for(s, model.config.heads[k].task)).item();
  }
  const double n = static_cast<double>(indices.size());
  for (std::size_t k = 0; k < tasks; ++k) {
    r.task_mean.push_back(r.task_sum[k] / n);
    r.joint_mean += weights.w[static_cast<Index>(k)] * r.task_mean[k];
    r.joint_sum += weights.w[static_cast<Index>(k)] * r.task_sum[k];
  }
  return r;
}

TrainResult train(MultimodalModel& model, const Dataset& dataset, const Splits& splits,
                  const TrainConfig& config) {
  if (config.epochs < 1)
    throw ArgumentError("train needs at least one epoch, got " +
                        std::to_string(config.epochs));
  if (config.batch_size < 1) throw ArgumentError("batch size must be positive");
  check_rates(config.optimizer);
  if (splits.train.empty() || splits.validation.empty())
    throw ArgumentError("train called with empty splits");

  Optimizer opt(config.optimizer, model, config.lambda_lr);
  Rng base(config.seed);

  TrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const TaskWeights weights_start = model.current_weights();

    Rng epoch_rng = base.derive(static_cast<std::uint64_t>(epoch));
    std::vector<std::size_t> order = splits.train;
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[epoch_rng.below(i + 1)]);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(stop));
      try {
        optimize_step(model, dataset, batch, opt, epoch_rng);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(start / config.batch_size) + ": " + e.what());
      }
    }

    const EvalResult on_train = evaluate(model, dataset, splits.train, weights_start);
    const EvalResult on_val = evaluate(model, dataset, splits.validation, weights_start);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_joint_mean = on_train.joint_mean;
    rec.train_joint_sum = on_train.joint_sum;
    rec.val_joint_mean = on_val.joint_mean;
    rec.val_joint_sum = on_val.joint_sum;
    rec.train_task_mean = on_train.task_mean;
    rec.val_task_mean = on_val.task_mean;
    rec.weights.assign(weights_start.w.data(),
                       weights_start.w.data() + weights_start.w.size());
    result.curve.push_back(std::move(rec));
  }

  result.final_weights = model.current_weights();
  result.best_epoch = 1;
  for (std::size_t i = 1; i < result.curve.size(); ++i)
    if (result.curve[i].val_joint_mean <
        result.curve[static_cast<std::size_t>(result.best_epoch - 1)].val_joint_mean)
      result.best_epoch = result.curve[i].epoch;
  return result;
}

std::pair<MultimodalModel, TrainResult> run_training(const ModelConfig& base,
                                                     const TrainConfig& config,
                                                     const Dataset& dataset,
                                                     const Splits& splits) {
  ModelConfig cfg = apply_modality(base, config.modality);
  cfg.head_input = config.head_input;
  Rng build_rng = Rng(config.seed).derive(0xb111d);
  MultimodalModel model = build_model(cfg, config.weighting, build_rng);
  TrainResult result = train(model, dataset, splits, config);
  return {std::move(model), std::move(result)};
}

SuiteOptions::SuiteOptions() : base(toy_preset()) {}

ExperimentReport run_suite(const Dataset& dataset, const Splits& splits,
                           std::uint64_t train_seed, const SuiteOptions& options) {
  struct Row {
    const char* name;
    Modality modality;
    bool dynamic;
  };
  // Table order: unimodal audio, unimodal video, static baseline, proposed
  const Row rows[] = {
      {"UM-dynamic-A", Modality::Audio, true},
      {"UM-dynamic-V", Modality::Video, true},
      {"MM-static", Modality::Multimodal, false},
      {"MM-dynamic", Modality::Multimodal, true},
  };

  const auto tasks = static_cast<Index>(options.base.heads.size());
  ExperimentReport report;
  report.train_seed = train_seed;

  for (std::size_t ri = 0; ri < 4; ++ri) {
    const Row& row = rows[ri];
    TrainConfig cfg;
    cfg.modality = row.modality;
    cfg.weighting =
        row.dynamic
            ? WeightingMode(DynamicWeighting{BalancingFactors::zeros(tasks),
                                             options.lambda_lr})
            : WeightingMode(StaticWeighting{TaskWeights::uniform(tasks)});
    cfg.optimizer = options.optimizer;
    cfg.epochs = options.epochs;
    cfg.batch_size = options.batch_size;
    cfg.lambda_lr = options.lambda_lr;
    cfg.seed = Rng(train_seed).derive(ri).seed();

    auto [model, result] = run_training(options.base, cfg, dataset, splits);

    ConfigResult out;
    out.name = row.name;
    out.uses_audio = row.modality != Modality::Video;
    out.uses_video = row.modality != Modality::Audio;
    out.final_weights.assign(result.final_weights.w.data(),
                             result.final_weights.w.data() +
                                 result.final_weights.w.size());
    out.final_val_joint_mean = result.curve.back().val_joint_mean;
    out.final_val_joint_sum = result.curve.back().val_joint_sum;
    out.best_epoch = result.best_epoch;
    out.best_val_joint_mean =
        result.curve[static_cast<std::size_t>(result.best_epoch - 1)].val_joint_mean;
    out.curve = std::move(result.curve);
    report.rows.push_back(std::move(out));
  }
  return report;
}

void write_curve_csv(const std::filesystem::path& path,
                     const std::vector<EpochRecord>& curve) {
  io::atomic_write(path, [&curve](std::ostream& out) {
    out << "epoch,train_joint_mean,train_joint_sum,val_joint_mean,val_joint_sum,"
           "w_emotion,w_gender,nll_emotion,nll_gender\n";
    for (const EpochRecord& r : curve) {
      if (r.weights.size() != 2 || r.val_task_mean.size() != 2)
        throw ArgumentError("curve CSV expects the two-task emotion/gender layout");
      out << r.epoch << ',' << fmt(r.train_joint_mean) << ',' << fmt(r.train_joint_sum)
          << ',' << fmt(r.val_joint_mean) << ',' << fmt(r.val_joint_sum) << ','
          << fmt(r.weights[0]) << ',' << fmt(r.weights[1]) << ','
          << fmt(r.val_task_mean[0]) << ',' << fmt(r.val_task_mean[1]) << '\n';
    }
  });
}

namespace {

nlohmann::ordered_json epoch_to_json(const EpochRecord& r) {
  return nlohmann::ordered_json{{"epoch", r.epoch},
                                {"train_joint_mean", r.train_joint_mean},
                                {"train_joint_sum", r.train_joint_sum},
                                {"val_joint_mean", r.val_joint_mean},
                                {"val_joint_sum", r.val_joint_sum},
                                {"train_task_mean", r.train_task_mean},
                                {"val_task_mean", r.val_task_mean},
                                {"weights", r.weights}};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ConfigResult& r : report.rows) {
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const EpochRecord& e : r.curve) curve.push_back(epoch_to_json(e));
    rows.push_back(nlohmann::ordered_json{{"name", r.name},
                                           {"uses_audio", r.uses_audio},
                                           {"uses_video", r.uses_video},
                                           {"final_weights", r.final_weights},
                                           {"final_val_joint_mean", r.final_val_joint_mean},
                                           {"final_val_joint_sum", r.final_val_joint_sum},
                                           {"best_epoch", r.best_epoch},
                                           {"best_val_joint_mean", r.best_val_joint_mean},
                                           {"curve", curve}});
  }
  nlohmann::ordered_json doc{{"train_seed", report.train_seed}, {"configurations", rows}};
  return doc.dump(2) + "\n";
}

void write_report_json(const std::filesystem::path& path,
                       const ExperimentReport& report) {
  const std::string text = report_to_json(report);
  io::atomic_write(path, [&text](std::ostream& out) { out << text; });
}

double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace mtlab
