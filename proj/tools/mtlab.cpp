// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: dataset synthesis, single training runs, the
// four-configuration experiment suite, and the gradient verification
// oracles. Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtlab/config.hpp"
#include "mtlab/gradcheck.hpp"
#include "mtlab/io.hpp"
#include "mtlab/trainer.hpp"

namespace fs = std::filesystem;
using namespace mtlab;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_manifest(const fs::path& path, const std::string& command,
                    ordered_json options, const std::vector<std::string>& outputs,
                    long long duration_ms) {
  ordered_json doc{{"tool", "mtlab"},
                   {"version", kVersion},
                   {"command", command},
                   {"options", std::move(options)},
                   {"outputs", outputs},
                   {"duration_ms", duration_ms}};
  const std::string text = doc.dump(2) + "\n";
  io::atomic_write(path, [&text](std::ostream& out) { out << text; });
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    seeds.push_back(std::strtoull(part.c_str(), nullptr, 10));
  }
  if (seeds.empty()) throw ArgumentError("--seeds needs at least one seed");
  return seeds;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  Index audio_len = 256;
  Index frames = 4;
  Index height = 12;
  Index width = 12;
  double noise = 0.1;
};

int cmd_synth(const SynthArgs& args) {
  Stopwatch timer;
  SynthSpec spec;
  spec.count = args.n;
  spec.seed = args.seed;
  spec.audio_length = args.audio_len;
  spec.frames = args.frames;
  spec.height = args.height;
  spec.width = args.width;
  spec.noise = args.noise;

  Dataset ds = synth_generate(spec);
  save_dataset(ds, args.out);

  std::array<int, kEmotionClasses> emo{};
  std::array<int, kGenderClasses> gen{};
  for (const Sample& s : ds.samples) {
    ++emo[static_cast<std::size_t>(s.emotion)];
    ++gen[static_cast<std::size_t>(s.gender)];
  }
  std::printf("wrote %s: %zu samples (audio 1x%lld, video %lldx1x%lldx%lld)\n",
              args.out.c_str(), ds.size(), static_cast<long long>(ds.audio_length),
              static_cast<long long>(ds.frames), static_cast<long long>(ds.height),
              static_cast<long long>(ds.width));
  const double n = std::max<std::size_t>(ds.size(), 1);
  std::printf("emotion marginals:");
  for (int c : emo) std::printf(" %.4f", c / n);
  std::printf("\ngender marginals:");
  for (int c : gen) std::printf(" %.4f", c / n);
  std::printf("\n");

  write_manifest(args.out + ".manifest.json", "synth",
                 ordered_json{{"n", args.n},
                              {"seed", args.seed},
                              {"out", args.out},
                              {"audio_len", args.audio_len},
                              {"frames", args.frames},
                              {"height", args.height},
                              {"width", args.width},
                              {"noise", args.noise}},
                 {args.out}, timer.ms());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_train(const TrainArgs& args) {
  Stopwatch timer;
  Dataset ds = load_dataset(args.data);
  RunSpec spec = parse_run_config(args.config);
  spec.train.seed = args.seed;

  fs::create_directories(args.out);
  Splits splits = split_622(ds, args.seed);
  auto [model, result] = run_training(spec.base, spec.train, ds, splits);

  const fs::path curve_path = fs::path(args.out) / "curve.csv";
  const fs::path ckpt_path = fs::path(args.out) / "model.ckpt";
  write_curve_csv(curve_path, result.curve);
  save_checkpoint(model, ckpt_path);

  const EpochRecord& last = result.curve.back();
  std::printf("trained %d epochs; final val joint nll %.6f (mean) %.6f (sum)\n",
              last.epoch, last.val_joint_mean, last.val_joint_sum);
  std::printf("final task weights:");
  for (Index i = 0; i < result.final_weights.w.size(); ++i)
    std::printf(" %.4f", result.final_weights.w[i]);
  std::printf("  (best validation at epoch %d)\n", result.best_epoch);

  write_manifest(fs::path(args.out) / "manifest.json", "train",
                 ordered_json{{"data", args.data},
                              {"config", args.config},
                              {"seed", args.seed},
                              {"out", args.out}},
                 {curve_path.string(), ckpt_path.string()}, timer.ms());
  return 0;
}

// ---------------------------------------------------------------- suite

struct SuiteArgs {
  std::string data;
  std::string seeds = "1,2,3,4,5";
  std::string out;
  std::string preset = "toy";
  int epochs = 30;
  std::size_t batch = 8;
  double lr = 1e-3;
  double lambda_lr = -1.0;  // <0: same as lr
};

int cmd_suite(const SuiteArgs& args) {
  Stopwatch timer;
  Dataset ds = load_dataset(args.data);
  const std::vector<std::uint64_t> seeds = parse_seed_list(args.seeds);

  SuiteOptions options;
  options.base = preset_by_name(args.preset);
  options.epochs = args.epochs;
  options.batch_size = args.batch;
  options.optimizer.learning_rate = args.lr;
  if (args.lambda_lr >= 0.0) options.lambda_lr = args.lambda_lr;

  fs::create_directories(args.out);
  std::vector<std::string> outputs;
  std::vector<ExperimentReport> reports;
  ordered_json runs = ordered_json::array();

  for (std::uint64_t seed : seeds) {
    Splits splits = split_622(ds, seed);
    ExperimentReport report = run_suite(ds, splits, seed, options);
    const fs::path seed_dir = fs::path(args.out) / ("seed" + std::to_string(seed));
    fs::create_directories(seed_dir);
    for (const ConfigResult& row : report.rows) {
      const fs::path csv = seed_dir / (row.name + ".csv");
      write_curve_csv(csv, row.curve);
      outputs.push_back(csv.string());
    }
    ordered_json run = ordered_json::parse(report_to_json(report));
    run["seed"] = seed;
    runs.push_back(std::move(run));
    reports.push_back(std::move(report));
  }

  // median-over-seeds summary in the four-row table order
  ordered_json summary = ordered_json::array();
  std::printf("%-14s %-12s %-19s %s\n", "Model", "Modality", "Task Weights",
              "Validation NLL");
  for (std::size_t ri = 0; ri < reports.front().rows.size(); ++ri) {
    std::vector<double> w0, w1, val_mean, val_sum;
    for (const ExperimentReport& r : reports) {
      w0.push_back(r.rows[ri].final_weights[0]);
      w1.push_back(r.rows[ri].final_weights[1]);
      val_mean.push_back(r.rows[ri].final_val_joint_mean);
      val_sum.push_back(r.rows[ri].final_val_joint_sum);
    }
    const ConfigResult& row = reports.front().rows[ri];
    const std::string modality =
        row.uses_audio && row.uses_video ? "audio+video"
                                         : (row.uses_audio ? "audio" : "video");
    std::printf("%-14s %-12s %.4f / %.4f     %.6f\n", row.name.c_str(),
                modality.c_str(), median(w0), median(w1), median(val_mean));
    summary.push_back(ordered_json{{"name", row.name},
                                   {"uses_audio", row.uses_audio},
                                   {"uses_video", row.uses_video},
                                   {"median_final_weights",
                                    std::vector<double>{median(w0), median(w1)}},
                                   {"median_final_val_joint_mean", median(val_mean)},
                                   {"median_final_val_joint_sum", median(val_sum)}});
  }

  ordered_json doc{{"tool", "mtlab"},     {"version", kVersion},
                   {"dataset", args.data}, {"seeds", seeds},
                   {"summary", summary},  {"runs", runs}};
  const fs::path report_path = fs::path(args.out) / "report.json";
  const std::string text = doc.dump(2) + "\n";
  io::atomic_write(report_path, [&text](std::ostream& out) { out << text; });
  outputs.push_back(report_path.string());

  write_manifest(fs::path(args.out) / "manifest.json", "suite",
                 ordered_json{{"data", args.data},
                              {"seeds", args.seeds},
                              {"out", args.out},
                              {"preset", args.preset},
                              {"epochs", args.epochs},
                              {"batch", args.batch},
                              {"lr", args.lr},
                              {"lambda_lr", args.lambda_lr}},
                 outputs, timer.ms());
  return 0;
}

// ------------------------------------------------------------ gradcheck

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Error of backward() vs central differences, relative to the gradient
// vector's max-norm (tiny individual components sit below the resolution
// of f64 central differences and cannot carry a per-element bound).
double fd_vector_error(const ScalarFn& f, const Tensor& point, double eps) {
  Tape tape;
  Tensor x = tape.watch(point);
  const Eigen::VectorXd analytic = tape.backward(f(tape, x)).at(x).values();

  Eigen::VectorXd numeric(point.size());
  Tensor probe = point.detached();
  for (Index i = 0; i < point.size(); ++i) {
    const double saved = probe[i];
    Tape hi_tape, lo_tape;
    probe[i] = saved + eps;
    const double hi = f(hi_tape, probe).item();
    probe[i] = saved - eps;
    const double lo = f(lo_tape, probe).item();
    probe[i] = saved;
    numeric[i] = (hi - lo) / (2.0 * eps);
  }
  const double scale = std::max(
      {analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-8});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

double check_core(Rng& rng) {
  double worst = 0.0;
  for (int it = 0; it < 60; ++it) {
    Index n = 2 + static_cast<Index>(rng.below(7));
    Tensor x0 = random_tensor({n}, rng, -2.0, 2.0);
    std::vector<std::function<Tensor(const Tensor&)>> stages;
    const int depth = 1 + static_cast<int>(rng.below(6));
    for (int d = 0; d < depth; ++d) {
      switch (rng.below(6)) {
        case 0:
          stages.emplace_back(
              [](const Tensor& t) { return activation(t, Activation::Tanh); });
          break;
        case 1:
          stages.emplace_back(
              [](const Tensor& t) { return activation(t, Activation::Sigmoid); });
          break;
        case 2:
          stages.emplace_back(
              [](const Tensor& t) { return activation(t, Activation::Relu); });
          break;
        case 3: {
          const Index m = 2 + static_cast<Index>(rng.below(7));
          Tensor w = random_tensor({m, n}, rng);
          stages.emplace_back([w, n, m](const Tensor& t) {
            return reshape(matmul(w, reshape(t, {n, 1})), {m});
          });
          n = m;
          break;
        }
        case 4: {
          Tensor c = random_tensor({n}, rng);
          stages.emplace_back([c](const Tensor& t) { return mul(t, c); });
          break;
        }
        case 5:
          stages.emplace_back([](const Tensor& t) { return log_softmax(t); });
          break;
      }
    }
    ScalarFn f = [&stages](Tape&, const Tensor& x) {
      Tensor cur = x;
      for (const auto& s : stages) cur = s(cur);
      return sum(cur);
    };
    worst = std::max(worst, fd_vector_error(f, x0, 1e-5));
  }
  return worst;
}

double check_core_linear(Rng& rng) {
  double worst = 0.0;
  for (int it = 0; it < 20; ++it) {
    const Index n = 2 + static_cast<Index>(rng.below(7));
    Tensor x0 = random_tensor({n}, rng, -2.0, 2.0);
    Tensor w = random_tensor({3, n}, rng);
    ScalarFn f = [&w, n](Tape&, const Tensor& x) {
      return sum(matmul(w, reshape(x, {n, 1})));
    };
    worst = std::max(worst, finite_diff_check(f, x0, 1e-5));
  }
  return worst;
}

double check_layers(Rng& rng) {
  double worst = 0.0;

  LstmLayer layer = make_lstm_layer(3, 4, rng);
  std::vector<Tensor> seq;
  for (int t = 0; t < 3; ++t) seq.push_back(random_tensor({3}, rng));
  auto lstm_loss = [&](const LstmLayer& l) {
    LstmResult r = lstm_forward(l, seq, Tensor({4}), Tensor({4}));
    Tensor acc = r.h;
    for (const Tensor& h : r.outputs) acc = add(acc, h);
    return sum(acc);
  };
  ScalarFn wrt_wi = [&](Tape&, const Tensor& p) {
    LstmLayer l = layer;
    l.w_input = p;
    return lstm_loss(l);
  };
  ScalarFn wrt_wh = [&](Tape&, const Tensor& p) {
    LstmLayer l = layer;
    l.w_hidden = p;
    return lstm_loss(l);
  };
  ScalarFn wrt_b = [&](Tape&, const Tensor& p) {
    LstmLayer l = layer;
    l.bias = p;
    return lstm_loss(l);
  };
  worst = std::max(worst, finite_diff_check(wrt_wi, layer.w_input, 1e-5));
  worst = std::max(worst, finite_diff_check(wrt_wh, layer.w_hidden, 1e-5));
  worst = std::max(worst, finite_diff_check(wrt_b, layer.bias, 1e-5));

  BottleneckBlock block = make_bottleneck(2, 2, 3, rng);
  Tensor x = random_tensor({2, 4, 4}, rng);
  auto block_loss = [&](const BottleneckBlock& b) {
    return sum(bottleneck_forward(b, x));
  };
  ScalarFn wrt_reduce = [&](Tape&, const Tensor& p) {
    BottleneckBlock b = block;
    b.conv_reduce = p;
    return block_loss(b);
  };
  ScalarFn wrt_spatial = [&](Tape&, const Tensor& p) {
    BottleneckBlock b = block;
    b.conv_spatial = p;
    return block_loss(b);
  };
  ScalarFn wrt_expand = [&](Tape&, const Tensor& p) {
    BottleneckBlock b = block;
    b.conv_expand = p;
    return block_loss(b);
  };
  worst = std::max(worst, finite_diff_check(wrt_reduce, block.conv_reduce, 1e-5));
  worst = std::max(worst, finite_diff_check(wrt_spatial, block.conv_spatial, 1e-5));
  worst = std::max(worst, finite_diff_check(wrt_expand, block.conv_expand, 1e-5));
  return worst;
}

GradCheckReport check_model(Rng& rng) {
  SynthSpec spec;
  spec.count = 1;
  spec.seed = rng.bits();
  Dataset ds = synth_generate(spec);
  const Sample& s = ds.samples.front();

  Rng build(rng.bits());
  MultimodalModel model = build_model(
      toy_preset(), DynamicWeighting{BalancingFactors::zeros(2), std::nullopt}, build);
  return model_grad_check(model, s.audio, s.video, {s.emotion, s.gender}, 50, 1e-6,
                          1e-4, rng);
}

double check_lambda(Rng& rng) {
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    const Index k = 2 + static_cast<Index>(rng.below(2));
    Eigen::VectorXd lambda(k);
    std::vector<double> losses;
    double lo = 1e9, hi = -1e9;
    do {
      losses.clear();
      for (Index i = 0; i < k; ++i) {
        lambda[i] = rng.uniform(-1.5, 1.5);
        losses.push_back(rng.uniform(0.0, 4.0));
        lo = std::min(lo, losses.back());
        hi = std::max(hi, losses.back());
      }
    } while (hi - lo < 1.0);

    const Eigen::VectorXd closed = grad_lambda({lambda}, losses);

    Eigen::VectorXd fd(k);
    for (Index i = 0; i < k; ++i) {
      Eigen::VectorXd up = lambda, dn = lambda;
      up[i] += 1e-5;
      dn[i] -= 1e-5;
      fd[i] = (joint_loss_value(task_weights({up}), losses) -
               joint_loss_value(task_weights({dn}), losses)) /
              2e-5;
    }

    Tape tape;
    Tensor l = tape.watch(Tensor({k}, lambda));
    std::vector<Tensor> nodes;
    for (double v : losses) nodes.push_back(Tensor::scalar(v));
    const Eigen::VectorXd auto_grad = tape.backward(joint_loss(l, nodes)).at(l).values();

    const double scale = std::max(closed.cwiseAbs().maxCoeff(), 1e-8);
    worst = std::max(worst, (closed - fd).cwiseAbs().maxCoeff() / scale);
    worst = std::max(worst, (closed - auto_grad).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

int cmd_gradcheck(const std::string& scope) {
  Rng rng(0x5eed);
  bool ok = true;
  auto report = [&ok](const char* what, double err, double tol) {
    const bool pass = err < tol;
    std::printf("%-22s max relative error %.3e (tolerance %.0e) %s\n", what, err, tol,
                pass ? "ok" : "FAIL");
    ok = ok && pass;
  };

  if (scope == "core") {
    report("core compositions", check_core(rng), 1e-6);
    report("core linear maps", check_core_linear(rng), 1e-9);
  } else if (scope == "layers") {
    report("layer parameters", check_layers(rng), 1e-5);
  } else if (scope == "model") {
    GradCheckReport r = check_model(rng);
    report("toy model end-to-end", r.max_rel_err, 1e-4);
    for (const std::string& name : r.offenders)
      std::printf("  offending parameter: %s\n", name.c_str());
  } else if (scope == "lambda") {
    report("lambda closed form", check_lambda(rng), 1e-8);
  } else {
    throw ArgumentError("unknown gradcheck scope '" + scope + "'");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task dynamic joint-loss weighting laboratory"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--n", synth_args.n, "sample count")->required();
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_option("--out", synth_args.out, "output .mmgd path")->required();
  synth->add_option("--audio-len", synth_args.audio_len, "audio samples per clip");
  synth->add_option("--frames", synth_args.frames, "video frames per clip");
  synth->add_option("--height", synth_args.height, "frame height");
  synth->add_option("--width", synth_args.width, "frame width");
  synth->add_option("--noise", synth_args.noise, "gaussian noise sigma");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train one configuration");
  train->add_option("--data", train_args.data, "dataset .mmgd path")->required();
  train->add_option("--config", train_args.config, "run configuration file")->required();
  train->add_option("--seed", train_args.seed, "training seed");
  train->add_option("--out", train_args.out, "output directory")->required();

  SuiteArgs suite_args;
  CLI::App* suite = app.add_subcommand("suite", "run the four-configuration suite");
  suite->add_option("--data", suite_args.data, "dataset .mmgd path")->required();
  suite->add_option("--seeds", suite_args.seeds, "comma-separated seed list");
  suite->add_option("--out", suite_args.out, "output directory")->required();
  suite->add_option("--preset", suite_args.preset, "model preset (toy|full)");
  suite->add_option("--epochs", suite_args.epochs, "epochs per run");
  suite->add_option("--batch", suite_args.batch, "batch size");
  suite->add_option("--lr", suite_args.lr, "learning rate");
  suite->add_option("--lambda-lr", suite_args.lambda_lr,
                    "balancing-factor learning rate (default: same as --lr)");

  std::string scope;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "run the gradient oracles");
  gradcheck->add_option("--scope", scope, "core|layers|model|lambda")
      ->required()
      ->check(CLI::IsMember({"core", "layers", "model", "lambda"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) return cmd_synth(synth_args);
    if (*train) return cmd_train(train_args);
    if (*suite) return cmd_suite(suite_args);
    if (*gradcheck) return cmd_gradcheck(scope);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
