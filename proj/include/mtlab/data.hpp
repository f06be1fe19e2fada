// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic multimodal dataset: class-conditioned audio and video
// surrogates with known decision boundaries, annotation aggregation by
// majority vote, a deterministic 6:2:2 split, and a bit-exact binary
// format ("MMGD") so externally prepared tensors can run the same
// experiments.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mtlab/rng.hpp"
#include "mtlab/tensor.hpp"

namespace mtlab {

inline constexpr int kEmotionClasses = 4;  // anger, happiness, neutral, sadness
inline constexpr int kGenderClasses = 2;   // female, male

struct Sample {
  Tensor audio;     // [1 x L]
  Tensor video;     // [T x C x H x W]
  int emotion = 0;  // 0..3
  int gender = 0;   // 0..1
};

struct Dataset {
  Index audio_length = 0;                      // L
  Index frames = 0;                            // T
  Index channels = 0, height = 0, width = 0;   // C, H, W
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

// Labels from independent annotators, at least one.
struct AnnotationSet {
  std::vector<int> votes;
};

// The unique modal label when one exists; a uniform draw among the tied
// labels otherwise.
int majority_label(const AnnotationSet& votes, Rng& rng);

struct Splits {
  std::vector<std::size_t> train, validation, test;
};

// Seeded shuffle, then floor(n/5) validation and test samples with the
// remainder in train: exactly (6, 2, 2) at n = 10.
Splits split_622(std::size_t dataset_size, std::uint64_t seed);
Splits split_622(const Dataset& dataset, std::uint64_t seed);

// Generator parameters. Emotion keys the audio sinusoid frequency and the
// video grating wave vector; gender keys the audio carrier amplitude and
// the video brightness. Gender is recoverable from either modality by a
// single threshold, emotion is not: the designed "gender is easier"
// asymmetry.
struct SynthSpec {
  std::size_t count = 0;
  Index audio_length = 256;
  Index frames = 4;
  Index channels = 1;
  Index height = 12;
  Index width = 12;

  std::array<double, kEmotionClasses> emotion_cycles = {2.0, 5.0, 8.0, 11.0};
  double emotion_amplitude = 1.2;  // fixed-phase template per class
  double carrier_cycles = 20.0;
  std::array<double, kGenderClasses> gender_amplitude = {0.98, 1.02};

  // video emotion rides on two channels that overlap across classes, so
  // the video-only route carries irreducible ambiguity the audio route
  // does not: a spatial grating whose per-sample frequency is jittered
  // around the class base, and a per-frame brightness trajectory whose
  // per-sample phase is random while its temporal frequency is keyed by
  // the class. The trajectories survive pooling unchanged, which gives a
  // video-only model something clean to memorize.
  std::array<double, kEmotionClasses> pattern_cycles = {2.0, 2.8, 3.6, 4.4};
  double pattern_jitter = 0.8;
  double pattern_amplitude = 0.3;
  std::array<double, kEmotionClasses> temporal_cycles = {0.0, 1.0, 2.0, 3.0};
  double temporal_amplitude = 0.12;
  std::array<double, kGenderClasses> gender_brightness = {0.2, 0.8};

  double noise = 0.1;  // sigma of the added Gaussian noise
  std::uint64_t seed = 0;
};

// Deterministic per seed. Sample values are quantized to f32 precision at
// generation so the on-disk round trip is value-exact.
Dataset synth_generate(const SynthSpec& spec);

// "MMGD" format, little-endian: magic, u32 version (1), u64 sample count,
// dims L,T,C,H,W as u32, then per sample the audio f32 array, video f32
// array, emotion u8, gender u8.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace mtlab
