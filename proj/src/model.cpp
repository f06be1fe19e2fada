// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/model.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <set>

#include "mtlab/io.hpp"

namespace mtlab {

namespace {

[[noreturn]] void chain_error(const std::string& stage, const std::string& why) {
  throw ConfigError(stage + ": " + why);
}

struct SpeechShape {
  Index channels = 0;
  Index length = 0;
};

SpeechShape walk_speech(const SpeechConfig& sc, Index time_steps) {
  if (sc.in_channels < 1 || sc.input_length < 1)
    chain_error("speech input", "channels and length must be positive");
  Index ch = sc.in_channels;
  Index len = sc.input_length;
  for (std::size_t i = 0; i < sc.stages.size(); ++i) {
    const std::string stage = "speech stage " + std::to_string(i);
    const auto& [cv, pl] = sc.stages[i];
    if (cv.filters < 1) chain_error(stage, "needs at least one filter");
    if (cv.stride < 1) chain_error(stage, "stride must be positive");
    if (cv.kernel < 1 || cv.kernel > len)
      chain_error(stage, "kernel " + std::to_string(cv.kernel) +
                             " does not fit input length " + std::to_string(len));
    len = (len - cv.kernel) / cv.stride + 1;
    ch = cv.filters;
    if (pl.size < 1) chain_error(stage, "pool size must be positive");
    if (pl.axis == PoolAxis::Time) {
      if (len % pl.size != 0)
        chain_error(stage, "pool " + std::to_string(pl.size) +
                               " does not divide length " + std::to_string(len));
      len /= pl.size;
    } else {
      if (ch % pl.size != 0)
        chain_error(stage, "pool " + std::to_string(pl.size) +
                               " does not divide channels " + std::to_string(ch));
      ch /= pl.size;
    }
  }
  if (len % time_steps != 0)
    chain_error("speech output",
                "length " + std::to_string(len) + " is not divisible by " +
                    std::to_string(time_steps) + " time steps");
  return {ch, len};
}

struct VisualShape {
  Index channels = 0;
  Index height = 0;
  Index width = 0;
};

VisualShape walk_visual(const VisualConfig& vc) {
  if (vc.in_channels < 1 || vc.height < 1 || vc.width < 1)
    chain_error("visual input", "channels and spatial dims must be positive");
  const VisualStem& st = vc.stem;
  if (st.filters < 1 || st.stride < 1 || st.pool < 1)
    chain_error("visual stem", "filters, stride and pool must be positive");
  if (st.kernel < 1 || st.kernel > vc.height || st.kernel > vc.width)
    chain_error("visual stem", "kernel " + std::to_string(st.kernel) +
                                   " does not fit " + std::to_string(vc.height) +
                                   "x" + std::to_string(vc.width));
  Index h = (vc.height - st.kernel) / st.stride + 1;
  Index w = (vc.width - st.kernel) / st.stride + 1;
  if (h % st.pool != 0 || w % st.pool != 0)
    chain_error("visual stem", "pool " + std::to_string(st.pool) +
                                   " does not divide " + std::to_string(h) + "x" +
                                   std::to_string(w));
  h /= st.pool;
  w /= st.pool;
  Index ch = st.filters;
  for (std::size_t i = 0; i < vc.blocks.size(); ++i) {
    const auto& b = vc.blocks[i];
    if (b.mid < 1 || b.out < 1)
      chain_error("visual block " + std::to_string(i), "widths must be positive");
    ch = b.out;  // blocks preserve the spatial extent
  }
  return {ch, h, w};
}

std::string head_name(const HeadSpec& head, const char* leaf) {
  return "head." + head.task + "." + leaf;
}

Tensor conv_glorot(Index out_ch, Index in_ch, const Shape& kernel_shape, Rng& rng) {
  Index spatial = 1;
  for (std::size_t i = 2; i < kernel_shape.size(); ++i) spatial *= kernel_shape[i];
  return glorot_init(in_ch * spatial, out_ch * spatial, kernel_shape, rng);
}

}  // namespace

ShapeChain validate_config(const ModelConfig& config) {
  if (config.time_steps < 1)
    chain_error("sequence", "time_steps must be positive");
  if (config.heads.empty()) chain_error("heads", "at least one task head required");
  std::set<std::string> names;
  for (const auto& h : config.heads) {
    if (h.task.empty()) chain_error("heads", "task names must be non-empty");
    if (h.classes < 2)
      chain_error("head " + h.task, "needs at least two classes");
    if (!names.insert(h.task).second)
      chain_error("head " + h.task, "duplicate task name");
  }
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    chain_error("dropout", "rate must lie in [0, 1)");
  if (config.recurrent.layers < 1 || config.recurrent.cells < 1)
    chain_error("recurrent", "layers and cells must be positive");

  const bool want_audio = config.fusion != FusionMode::VideoOnly;
  const bool want_video = config.fusion != FusionMode::AudioOnly;
  if (want_audio != config.speech.has_value())
    chain_error("fusion", want_audio ? "speech branch config missing"
                                     : "speech branch config present but unused");
  if (want_video != config.visual.has_value())
    chain_error("fusion", want_video ? "visual branch config missing"
                                     : "visual branch config present but unused");

  ShapeChain chain;
  if (config.speech) {
    const SpeechShape s = walk_speech(*config.speech, config.time_steps);
    chain.audio_step_features = s.channels * (s.length / config.time_steps);
  }
  if (config.visual) {
    const VisualShape v = walk_visual(*config.visual);
    chain.visual_step_features = v.channels;
  }
  chain.lstm_input = chain.audio_step_features + chain.visual_step_features;
  return chain;
}

ModelConfig full_preset() {
  ModelConfig cfg;
  SpeechConfig speech;
  speech.in_channels = 1;
  speech.input_length = 96000;  // 16 kHz x 6 s
  speech.stages = {
      // 5 ms window at 16 kHz = 80 samples; pool 2 halves the rate to 8 kHz
      {{40, 80, 3}, {2, PoolAxis::Time, PoolMode::Max}},
      // 500 ms window at 8 kHz = 4000 samples; pool 10 across channels
      {{40, 4000, 500}, {10, PoolAxis::Channels, PoolMode::Max}},
  };
  cfg.speech = speech;

  VisualConfig visual;
  visual.in_channels = 3;
  visual.height = 96;
  visual.width = 96;
  visual.stem = {64, 7, 2, 3};
  visual.blocks = {{64, 256}, {128, 512}, {256, 1024}, {512, 2048}};
  cfg.visual = visual;

  cfg.fusion = FusionMode::Concat;
  cfg.time_steps = 24;
  cfg.recurrent = {2, 256};
  cfg.heads = {{"emotion", 4}, {"gender", 2}};
  cfg.dropout_rate = 0.5;
  return cfg;
}

ModelConfig toy_preset() {
  ModelConfig cfg;
  SpeechConfig speech;
  speech.in_channels = 1;
  speech.input_length = 256;
  speech.stages = {
      {{4, 8, 8}, {2, PoolAxis::Time, PoolMode::Max}},
      {{12, 4, 4}, {2, PoolAxis::Channels, PoolMode::Max}},
  };
  cfg.speech = speech;

  VisualConfig visual;
  visual.in_channels = 1;
  visual.height = 12;
  visual.width = 12;
  visual.stem = {16, 3, 1, 2};
  visual.blocks = {{8, 32}};
  cfg.visual = visual;

  cfg.fusion = FusionMode::Concat;
  cfg.time_steps = 4;
  cfg.recurrent = {2, 16};
  cfg.heads = {{"emotion", 4}, {"gender", 2}};
  cfg.dropout_rate = 0.5;
  return cfg;
}

Index MultimodalModel::lambda_index() const {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].name == "lambda") return static_cast<Index>(i);
  return -1;
}

TaskWeights MultimodalModel::current_weights() const {
  if (const auto* st = std::get_if<StaticWeighting>(&weighting)) return st->weights;
  const Index li = lambda_index();
  assert(li >= 0);
  return task_weights({params[static_cast<std::size_t>(li)].value.values()});
}

MultimodalModel build_model(const ModelConfig& config, const WeightingMode& weighting,
                            Rng& rng) {
  const ShapeChain chain = validate_config(config);
  const auto tasks = static_cast<Index>(config.heads.size());

  if (const auto* st = std::get_if<StaticWeighting>(&weighting)) {
    if (st->weights.w.size() != tasks)
      throw ArgumentError("static weighting covers " +
                          std::to_string(st->weights.w.size()) + " tasks, model has " +
                          std::to_string(tasks));
    if (st->weights.w.minCoeff() <= 0.0 || std::abs(st->weights.w.sum() - 1.0) > 1e-12)
      throw ArgumentError("static weights must be a simplex point");
  } else {
    const auto& dyn = std::get<DynamicWeighting>(weighting);
    if (dyn.init.lambda.size() != tasks)
      throw ArgumentError("dynamic weighting inits " +
                          std::to_string(dyn.init.lambda.size()) + " factors, model has " +
                          std::to_string(tasks) + " tasks");
    if (!dyn.init.lambda.allFinite())
      throw NumericError("dynamic weighting init must be finite");
  }

  MultimodalModel model{config, weighting, {}};
  auto push = [&model](std::string name, Tensor value) {
    model.params.push_back({std::move(name), std::move(value)});
  };

  if (config.speech) {
    Index ch = config.speech->in_channels;
    for (std::size_t i = 0; i < config.speech->stages.size(); ++i) {
      const auto& [cv, pl] = config.speech->stages[i];
      push("speech.stage" + std::to_string(i) + ".kernel",
           conv_glorot(cv.filters, ch, {cv.filters, ch, cv.kernel}, rng));
      ch = cv.filters;
      if (pl.axis == PoolAxis::Channels) ch /= pl.size;
    }
  }

  if (config.visual) {
    const VisualConfig& vc = *config.visual;
    push("visual.stem.kernel",
         conv_glorot(vc.stem.filters, vc.in_channels,
                     {vc.stem.filters, vc.in_channels, vc.stem.kernel, vc.stem.kernel},
                     rng));
    Index ch = vc.stem.filters;
    for (std::size_t i = 0; i < vc.blocks.size(); ++i) {
      BottleneckBlock block = make_bottleneck(ch, vc.blocks[i].mid, vc.blocks[i].out, rng);
      const std::string base = "visual.block" + std::to_string(i);
      push(base + ".reduce", std::move(block.conv_reduce));
      push(base + ".spatial", std::move(block.conv_spatial));
      push(base + ".expand", std::move(block.conv_expand));
      if (block.projection) push(base + ".project", std::move(*block.projection));
      ch = vc.blocks[i].out;
    }
  }

  Index in_size = chain.lstm_input;
  for (Index l = 0; l < config.recurrent.layers; ++l) {
    LstmLayer layer = make_lstm_layer(in_size, config.recurrent.cells, rng);
    const std::string base = "lstm.layer" + std::to_string(l);
    push(base + ".w_input", std::move(layer.w_input));
    push(base + ".w_hidden", std::move(layer.w_hidden));
    push(base + ".bias", std::move(layer.bias));
    in_size = config.recurrent.cells;
  }

  for (const HeadSpec& head : config.heads) {
    push(head_name(head, "weight"),
         glorot_init(config.recurrent.cells, head.classes,
                     {head.classes, config.recurrent.cells}, rng));
    push(head_name(head, "bias"), Tensor({head.classes}));
  }

  if (const auto* dyn = std::get_if<DynamicWeighting>(&weighting))
    push("lambda", Tensor({tasks}, dyn->init.lambda));

  return model;
}

BoundParams bind_params(const MultimodalModel& model, Tape* tape) {
  BoundParams bound;
  bound.flat.reserve(model.params.size());
  for (const NamedParam& p : model.params)
    bound.flat.push_back(tape != nullptr ? tape->watch(p.value) : p.value);

  std::size_t cursor = 0;
  auto next = [&](const std::string& name) -> const Tensor& {
    assert(cursor < bound.flat.size());
    assert(model.params[cursor].name == name);
    (void)name;
    return bound.flat[cursor++];
  };

  const ModelConfig& config = model.config;
  if (config.speech) {
    for (std::size_t i = 0; i < config.speech->stages.size(); ++i)
      bound.speech_kernels.push_back(
          next("speech.stage" + std::to_string(i) + ".kernel"));
  }
  if (config.visual) {
    bound.visual_stem = next("visual.stem.kernel");
    Index ch = config.visual->stem.filters;
    for (std::size_t i = 0; i < config.visual->blocks.size(); ++i) {
      const auto& spec = config.visual->blocks[i];
      const std::string base = "visual.block" + std::to_string(i);
      BottleneckBlock block;
      block.in_channels = ch;
      block.mid_channels = spec.mid;
      block.out_channels = spec.out;
      block.conv_reduce = next(base + ".reduce");
      block.conv_spatial = next(base + ".spatial");
      block.conv_expand = next(base + ".expand");
      if (ch != spec.out) block.projection = next(base + ".project");
      bound.blocks.push_back(std::move(block));
      ch = spec.out;
    }
  }

  const ShapeChain chain = validate_config(config);
  Index in_size = chain.lstm_input;
  for (Index l = 0; l < config.recurrent.layers; ++l) {
    const std::string base = "lstm.layer" + std::to_string(l);
    LstmLayer layer;
    layer.input_size = in_size;
    layer.hidden_size = config.recurrent.cells;
    layer.w_input = next(base + ".w_input");
    layer.w_hidden = next(base + ".w_hidden");
    layer.bias = next(base + ".bias");
    bound.lstm.push_back(std::move(layer));
    in_size = config.recurrent.cells;
  }

  for (const HeadSpec& head : config.heads) {
    BoundParams::Head h;
    h.weight = next(head_name(head, "weight"));
    h.bias = next(head_name(head, "bias"));
    bound.heads.push_back(std::move(h));
  }

  if (model.dynamic()) {
    bound.lambda = next("lambda");
    bound.has_lambda = true;
  }
  assert(cursor == bound.flat.size());
  return bound;
}

namespace {

std::vector<Tensor> speech_steps(const SpeechConfig& sc,
                                 const std::vector<Tensor>& kernels,
                                 const Tensor& audio, Index time_steps) {
  Tensor x = audio;
  for (std::size_t i = 0; i < sc.stages.size(); ++i) {
    const auto& [cv, pl] = sc.stages[i];
    x = activation(conv(x, kernels[i], {cv.stride}), Activation::Relu);
    x = pool(x, pl.size, pl.axis == PoolAxis::Time ? 1 : 0, pl.mode);
  }
  const Index ch = x.dim(0), len = x.dim(1);
  const Index chunk = len / time_steps;
  std::vector<Tensor> steps;
  steps.reserve(static_cast<std::size_t>(time_steps));
  for (Index t = 0; t < time_steps; ++t)
    steps.push_back(reshape(narrow(x, 1, t * chunk, chunk), {ch * chunk}));
  return steps;
}

Tensor visual_encode_frame(const VisualConfig& vc, const BoundParams& p,
                           const Tensor& frame) {
  Tensor x = activation(conv(frame, p.visual_stem, {vc.stem.stride, vc.stem.stride}),
                        Activation::Relu);
  x = pool(x, vc.stem.pool, 1, PoolMode::Max);
  x = pool(x, vc.stem.pool, 2, PoolMode::Max);
  for (const BottleneckBlock& block : p.blocks) x = bottleneck_forward(block, x);
  x = pool(x, x.dim(1), 1, PoolMode::Avg);  // global average pooling
  x = pool(x, x.dim(2), 2, PoolMode::Avg);
  return reshape(x, {x.dim(0)});
}

}  // namespace

std::vector<Tensor> forward(const MultimodalModel& model, const BoundParams& params,
                            const Tensor& audio, const Tensor& video, RunMode mode,
                            Rng& rng) {
  const ModelConfig& config = model.config;
  const Index T = config.time_steps;

  std::vector<Tensor> audio_steps, video_steps;
  if (config.speech) {
    const SpeechConfig& sc = *config.speech;
    if (audio.shape() != Shape{sc.in_channels, sc.input_length})
      throw InputError("audio input " + shape_str(audio.shape()) +
                       " does not match the configured [" +
                       std::to_string(sc.in_channels) + " x " +
                       std::to_string(sc.input_length) + "]");
    audio_steps = speech_steps(sc, params.speech_kernels, audio, T);
  }
  if (config.visual) {
    const VisualConfig& vc = *config.visual;
    if (video.shape() != Shape{T, vc.in_channels, vc.height, vc.width})
      throw InputError("video input " + shape_str(video.shape()) +
                       " does not match the configured [" + std::to_string(T) +
                       " x " + std::to_string(vc.in_channels) + " x " +
                       std::to_string(vc.height) + " x " + std::to_string(vc.width) +
                       "]");
    video_steps.reserve(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
      Tensor frame = reshape(narrow(video, 0, t, 1),
                             {vc.in_channels, vc.height, vc.width});
      video_steps.push_back(visual_encode_frame(vc, params, frame));
    }
  }

  std::vector<Tensor> fused(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    switch (config.fusion) {
      case FusionMode::AudioOnly:
        fused[i] = audio_steps[i];
        break;
      case FusionMode::VideoOnly:
        fused[i] = video_steps[i];
        break;
      case FusionMode::Concat:
        fused[i] = concat(audio_steps[i], video_steps[i], 0);
        break;
    }
  }

  std::vector<Tensor> seq = std::move(fused);
  for (const LstmLayer& layer : params.lstm) {
    LstmResult r = lstm_forward(layer, seq, Tensor({layer.hidden_size}),
                                Tensor({layer.hidden_size}));
    seq = std::move(r.outputs);
  }

  Tensor head_in;
  if (config.head_input == HeadInput::LastStep) {
    head_in = seq.back();
  } else {
    head_in = seq.front();
    for (std::size_t t = 1; t < seq.size(); ++t) head_in = add(head_in, seq[t]);
    head_in = scale(head_in, 1.0 / static_cast<double>(T));
  }
  head_in = dropout_apply(head_in, {config.dropout_rate, mode == RunMode::Train}, rng);

  std::vector<Tensor> outputs;
  outputs.reserve(params.heads.size());
  for (const auto& head : params.heads)
    outputs.push_back(log_softmax(dense(head.weight, head_in, head.bias)));
  return outputs;
}

std::vector<Tensor> eval_forward(const MultimodalModel& model, const Tensor& audio,
                                 const Tensor& video) {
  Rng unused(0);
  return forward(model, bind_params(model, nullptr), audio, video, RunMode::Eval,
                 unused);
}

void save_checkpoint(const MultimodalModel& model, const std::filesystem::path& path) {
  io::atomic_write(path, [&model](std::ostream& out) {
    io::write_bytes(out, "MTLCKPT1", 8);
    io::write_u64(out, model.params.size());
    for (const NamedParam& p : model.params) {
      io::write_u64(out, p.name.size());
      io::write_bytes(out, p.name.data(), p.name.size());
      io::write_u32(out, static_cast<std::uint32_t>(p.value.rank()));
      for (Index d : p.value.shape()) io::write_u64(out, static_cast<std::uint64_t>(d));
      for (Index i = 0; i < p.value.size(); ++i) io::write_f64(out, p.value[i]);
    }
  });
}

void load_checkpoint(MultimodalModel& model, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  io::Reader r(in, "checkpoint " + path.string());

  if (r.read_string(8) != "MTLCKPT1") r.fail("bad magic");
  const std::uint64_t count = r.read_u64();
  if (count != model.params.size())
    r.fail("holds " + std::to_string(count) + " parameters, model expects " +
           std::to_string(model.params.size()));

  for (NamedParam& p : model.params) {
    const std::uint64_t name_len = r.read_u64();
    if (name_len > 4096) r.fail("unreasonable parameter name length");
    const std::string name = r.read_string(static_cast<std::size_t>(name_len));
    if (name != p.name) r.fail("parameter '" + name + "', expected '" + p.name + "'");
    const std::uint32_t rank = r.read_u32();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<Index>(r.read_u64());
    if (shape != p.value.shape())
      r.fail("parameter '" + name + "' has shape " + shape_str(shape) +
             ", expected " + shape_str(p.value.shape()));
    for (Index i = 0; i < p.value.size(); ++i) p.value[i] = r.read_f64();
  }
  r.expect_eof();
}

GradCheckReport model_grad_check(const MultimodalModel& model, const Tensor& audio,
                                 const Tensor& video,
                                 const std::vector<Index>& targets, int probes,
                                 double eps, double tolerance, Rng& rng) {
  if (targets.size() != model.config.heads.size())
    throw ArgumentError("model_grad_check needs one target per head");

  auto joint_value = [&](const MultimodalModel& m) {
    std::vector<Tensor> outs = eval_forward(m, audio, video);
    std::vector<double> losses;
    for (std::size_t i = 0; i < outs.size(); ++i)
      losses.push_back(nll(outs[i], targets[i]).item());
    return joint_loss_value(m.current_weights(), losses);
  };

  // analytic gradient of the same joint loss
  Tape tape;
  BoundParams bound = bind_params(model, &tape);
  Rng fwd_rng(0);
  std::vector<Tensor> outs = forward(model, bound, audio, video, RunMode::Eval, fwd_rng);
  std::vector<Tensor> losses;
  for (std::size_t i = 0; i < outs.size(); ++i)
    losses.push_back(nll(outs[i], targets[i]));
  Tensor joint = model.dynamic()
                     ? joint_loss(bound.lambda, losses)
                     : joint_loss(std::get<StaticWeighting>(model.weighting).weights,
                                  losses);
  GradientMap grads = tape.backward(joint);

  const Index lam = model.lambda_index();
  std::vector<std::pair<std::size_t, Index>> picks;
  for (int k = 0; k < probes; ++k) {
    std::size_t pi;
    do {
      pi = static_cast<std::size_t>(rng.below(model.params.size()));
    } while (static_cast<Index>(pi) == lam);
    picks.emplace_back(pi, static_cast<Index>(rng.below(
                               static_cast<std::uint64_t>(model.params[pi].value.size()))));
  }
  if (lam >= 0)
    for (Index i = 0; i < model.params[static_cast<std::size_t>(lam)].value.size(); ++i)
      picks.emplace_back(static_cast<std::size_t>(lam), i);

  std::vector<double> analytic(picks.size());
  double gscale = 1e-8;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const auto& [pi, ei] = picks[k];
    analytic[k] = grads.at(bound.flat[pi])[ei];
    gscale = std::max(gscale, std::abs(analytic[k]));
  }

  GradCheckReport report;
  MultimodalModel probe = model;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const auto& [pi, ei] = picks[k];
    double& slot = probe.params[pi].value[ei];
    const double saved = slot;
    slot = saved + eps;
    const double hi = joint_value(probe);
    slot = saved - eps;
    const double lo = joint_value(probe);
    slot = saved;

    const double numeric = (hi - lo) / (2.0 * eps);
    const double err = std::abs(analytic[k] - numeric) / gscale;
    report.max_rel_err = std::max(report.max_rel_err, err);
    if (err > tolerance) report.offenders.push_back(model.params[pi].name);
  }
  return report;
}

}  // namespace mtlab
