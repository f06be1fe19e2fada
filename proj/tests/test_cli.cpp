// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the command-line tool: determinism of emitted
// files, the exit-code contract, and the output formats.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mtlab/config.hpp"
#include "mtlab/data.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("mtlab-cli-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run(const std::string& args) {
  const fs::path log = work_dir() / "cmd.log";
  const std::string cmd =
      std::string(MTLAB_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WEXITSTATUS(raw);
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config(const fs::path& p, const std::string& weighting, int epochs) {
  std::ofstream out(p);
  out << "model.preset = toy\n"
      << "model.fusion = multimodal\n"
      << "train.weighting = " << weighting << "\n"
      << "train.epochs = " << epochs << "\n"
      << "train.batch = 8\n";
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("synth is deterministic and reports marginals") {
  const fs::path a = work_dir() / "a.mmgd";
  const fs::path b = work_dir() / "b.mmgd";
  RunResult r1 = run("synth --n 50 --seed 7 --out " + a.string());
  CHECK(r1.code == 0);
  CHECK(r1.out.find("emotion marginals:") != std::string::npos);
  CHECK(r1.out.find("gender marginals:") != std::string::npos);

  RunResult r2 = run("synth --n 50 --seed 7 --out " + b.string());
  CHECK(r2.code == 0);
  CHECK(slurp(a) == slurp(b));  // bitwise-identical datasets

  CHECK(fs::exists(work_dir() / "a.mmgd.manifest.json"));
}

TEST_CASE("synth prints near-uniform marginals at n=1000") {
  const fs::path p = work_dir() / "marginals.mmgd";
  RunResult r = run("synth --n 1000 --seed 1 --out " + p.string());
  REQUIRE(r.code == 0);

  auto numbers_after = [&](const std::string& tag) {
    const auto pos = r.out.find(tag);
    REQUIRE(pos != std::string::npos);
    std::stringstream ss(r.out.substr(pos + tag.size()));
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    return v;
  };
  const auto emo = numbers_after("emotion marginals:");
  REQUIRE(emo.size() >= 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(emo[i] - 0.25) < 0.1);
}

TEST_CASE("synth writes a valid empty dataset for --n 0") {
  const fs::path p = work_dir() / "empty.mmgd";
  CHECK(run("synth --n 0 --out " + p.string()).code == 0);
  mtlab::Dataset ds = mtlab::load_dataset(p);
  CHECK(ds.size() == 0);
}

TEST_CASE("train emits deterministic outputs and the 0.5 initial weights") {
  const fs::path data = work_dir() / "train-data.mmgd";
  REQUIRE(run("synth --n 40 --seed 3 --out " + data.string()).code == 0);
  const fs::path cfg = work_dir() / "dyn.cfg";
  write_config(cfg, "dynamic", 3);

  const fs::path out1 = work_dir() / "run1";
  const fs::path out2 = work_dir() / "run2";
  REQUIRE(run("train --data " + data.string() + " --config " + cfg.string() +
              " --seed 5 --out " + out1.string())
              .code == 0);
  REQUIRE(run("train --data " + data.string() + " --config " + cfg.string() +
              " --seed 5 --out " + out2.string())
              .code == 0);

  CHECK(slurp(out1 / "curve.csv") == slurp(out2 / "curve.csv"));
  CHECK(slurp(out1 / "model.ckpt") == slurp(out2 / "model.ckpt"));

  const auto lines = csv_lines(out1 / "curve.csv");
  REQUIRE(lines.size() == 4);  // header + 3 epochs
  CHECK(lines[0] ==
        "epoch,train_joint_mean,train_joint_sum,val_joint_mean,val_joint_sum,"
        "w_emotion,w_gender,nll_emotion,nll_gender");
  const auto first = csv_fields(lines[1]);
  CHECK(first[5] == "0.5");
  CHECK(first[6] == "0.5");
}

TEST_CASE("static configs hold the 0.5 weights at every epoch") {
  const fs::path data = work_dir() / "static-data.mmgd";
  REQUIRE(run("synth --n 40 --seed 4 --out " + data.string()).code == 0);
  const fs::path cfg = work_dir() / "static.cfg";
  write_config(cfg, "static", 3);

  const fs::path out = work_dir() / "static-run";
  REQUIRE(run("train --data " + data.string() + " --config " + cfg.string() +
              " --seed 5 --out " + out.string())
              .code == 0);
  const auto lines = csv_lines(out / "curve.csv");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv_fields(lines[i]);
    CHECK(f[5] == "0.5");
    CHECK(f[6] == "0.5");
  }
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("train --data /nonexistent.mmgd --config /nonexistent.cfg --out x").code ==
        2);

  const fs::path cfg = work_dir() / "bad.cfg";
  {
    std::ofstream out(cfg);
    out << "train.learning_speed = 9\n";
  }
  const fs::path data = work_dir() / "a.mmgd";
  RunResult r = run("train --data " + data.string() + " --config " + cfg.string() +
                    " --out " + (work_dir() / "x").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("train.learning_speed") != std::string::npos);

  CHECK(run("conjure --out y").code == 2);       // unknown subcommand
  CHECK(run("gradcheck --scope everything").code == 2);
  CHECK(run("synth --out z.mmgd").code == 2);    // missing required --n
}

TEST_CASE("suite replays to identical report bytes") {
  const fs::path data = work_dir() / "suite-data.mmgd";
  REQUIRE(run("synth --n 40 --seed 9 --out " + data.string()).code == 0);

  const fs::path s1 = work_dir() / "suite1";
  const fs::path s2 = work_dir() / "suite2";
  const std::string flags = " --seeds 1 --epochs 2 --data " + data.string();
  REQUIRE(run("suite" + flags + " --out " + s1.string()).code == 0);
  REQUIRE(run("suite" + flags + " --out " + s2.string()).code == 0);

  CHECK(slurp(s1 / "report.json") == slurp(s2 / "report.json"));
  for (const char* name :
       {"UM-dynamic-A.csv", "UM-dynamic-V.csv", "MM-static.csv", "MM-dynamic.csv"}) {
    CHECK(fs::exists(s1 / "seed1" / name));
    CHECK(slurp(s1 / "seed1" / name) == slurp(s2 / "seed1" / name));
  }

  RunResult r = run("suite" + flags + " --out " + (work_dir() / "suite3").string());
  CHECK(r.out.find("Model") != std::string::npos);
  CHECK(r.out.find("Modality") != std::string::npos);
  CHECK(r.out.find("Task Weights") != std::string::npos);
  CHECK(r.out.find("Validation NLL") != std::string::npos);
}

TEST_CASE("fast gradcheck scopes succeed") {
  CHECK(run("gradcheck --scope lambda").code == 0);
  CHECK(run("gradcheck --scope layers").code == 0);
}

TEST_CASE("the committed configuration presets parse and validate") {
  mtlab::RunSpec toy = mtlab::parse_run_config(fs::path(MTLAB_CFG_DIR) / "toy.cfg");
  CHECK(toy.base.speech->input_length == 256);
  CHECK(toy.train.epochs == 30);
  CHECK(std::holds_alternative<mtlab::DynamicWeighting>(toy.train.weighting));
  CHECK(mtlab::validate_config(toy.base).lstm_input > 0);

  mtlab::RunSpec full = mtlab::parse_run_config(fs::path(MTLAB_CFG_DIR) / "full.cfg");
  CHECK(full.base.speech->input_length == 96000);
  CHECK(full.base.recurrent.cells == 256);
  CHECK(mtlab::validate_config(full.base).lstm_input == 2052);
}
