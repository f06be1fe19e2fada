// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-text run configuration: dotted keys, '=' values, '#' comments.
// Presets select the model topology; the train block selects weighting,
// optimizer and schedule. Unknown keys or values are usage errors that
// name the offender.

#pragma once

#include <filesystem>

#include "mtlab/trainer.hpp"

namespace mtlab {

struct RunSpec {
  ModelConfig base;    // preset topology (fusion still multimodal)
  TrainConfig train;   // modality, weighting, optimizer, schedule
};

RunSpec parse_run_config(const std::filesystem::path& path);

// Built-in preset lookup: "toy" or "full".
ModelConfig preset_by_name(const std::string& name);

}  // namespace mtlab
