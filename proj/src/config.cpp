// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/config.hpp"

#include <fstream>
#include <sstream>

namespace mtlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("configuration key '" + key + "' has non-numeric value '" +
                        value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ArgumentError("configuration key '" + key + "' needs an integer, got '" +
                        value + "'");
  return i;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ArgumentError("configuration key '" + key + "' has unknown value '" + value +
                      "'");
}

}  // namespace

ModelConfig preset_by_name(const std::string& name) {
  if (name == "toy") return toy_preset();
  if (name == "full") return full_preset();
  throw ArgumentError("unknown preset '" + name + "' (expected toy or full)");
}

RunSpec parse_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read configuration file " + path.string());

  RunSpec spec;
  spec.base = toy_preset();
  bool dynamic = true;
  std::vector<double> static_weights{0.5, 0.5};

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "model.preset") {
      spec.base = preset_by_name(value);
    } else if (key == "model.fusion") {
      if (value == "audio")
        spec.train.modality = Modality::Audio;
      else if (value == "video")
        spec.train.modality = Modality::Video;
      else if (value == "multimodal")
        spec.train.modality = Modality::Multimodal;
      else
        bad_value(key, value);
    } else if (key == "model.head_input") {
      if (value == "last")
        spec.train.head_input = HeadInput::LastStep;
      else if (value == "mean")
        spec.train.head_input = HeadInput::MeanOverSteps;
      else
        bad_value(key, value);
    } else if (key == "model.dropout") {
      spec.base.dropout_rate = parse_double(key, value);
    } else if (key == "train.weighting") {
      if (value == "dynamic")
        dynamic = true;
      else if (value == "static")
        dynamic = false;
      else
        bad_value(key, value);
    } else if (key == "train.static_weights") {
      static_weights.clear();
      std::stringstream ss(value);
      std::string part;
      while (std::getline(ss, part, ','))
        static_weights.push_back(parse_double(key, trim(part)));
    } else if (key == "train.optimizer") {
      if (value == "adam")
        spec.train.optimizer.kind = OptimizerKind::Adam;
      else if (value == "sgd")
        spec.train.optimizer.kind = OptimizerKind::Sgd;
      else
        bad_value(key, value);
    } else if (key == "train.lr") {
      spec.train.optimizer.learning_rate = parse_double(key, value);
    } else if (key == "train.lambda_lr") {
      if (!value.empty()) spec.train.lambda_lr = parse_double(key, value);
    } else if (key == "train.epochs") {
      spec.train.epochs = parse_int(key, value);
    } else if (key == "train.batch") {
      const int b = parse_int(key, value);
      if (b < 1) throw ArgumentError("configuration key 'train.batch' must be >= 1");
      spec.train.batch_size = static_cast<std::size_t>(b);
    } else {
      throw ArgumentError("unknown configuration key '" + key + "'");
    }
  }

  const auto tasks = static_cast<Index>(spec.base.heads.size());
  if (dynamic) {
    spec.train.weighting =
        DynamicWeighting{BalancingFactors::zeros(tasks), spec.train.lambda_lr};
  } else {
    if (static_weights.size() != static_cast<std::size_t>(tasks))
      throw ArgumentError("train.static_weights needs one weight per task");
    Eigen::VectorXd w(tasks);
    for (Index i = 0; i < tasks; ++i) w[i] = static_weights[static_cast<std::size_t>(i)];
    spec.train.weighting = StaticWeighting{TaskWeights{w}};
  }
  return spec;
}

}  // namespace mtlab
