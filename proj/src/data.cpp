// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "mtlab/io.hpp"

namespace mtlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

int majority_label(const AnnotationSet& votes, Rng& rng) {
  if (votes.votes.empty()) throw ArgumentError("majority_label of no votes");

  std::map<int, int> counts;
  for (int v : votes.votes) ++counts[v];
  int best = 0;
  for (const auto& [label, n] : counts) best = std::max(best, n);

  std::vector<int> tied;
  for (const auto& [label, n] : counts)
    if (n == best) tied.push_back(label);
  if (tied.size() == 1) return tied.front();
  return tied[rng.below(tied.size())];
}

Splits split_622(std::size_t dataset_size, std::uint64_t seed) {
  if (dataset_size < 5)
    throw ArgumentError("split_622 needs at least 5 samples, got " +
                        std::to_string(dataset_size));

  std::vector<std::size_t> order(dataset_size);
  for (std::size_t i = 0; i < dataset_size; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = dataset_size - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(i + 1)]);

  const std::size_t n_val = dataset_size / 5;  // floor(0.2 n)
  const std::size_t n_test = dataset_size / 5;
  const std::size_t n_train = dataset_size - n_val - n_test;

  Splits s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                order.end());
  return s;
}

Splits split_622(const Dataset& dataset, std::uint64_t seed) {
  return split_622(dataset.size(), seed);
}

Dataset synth_generate(const SynthSpec& spec) {
  if (spec.audio_length < 1 || spec.frames < 1 || spec.channels < 1 ||
      spec.height < 1 || spec.width < 1)
    throw ArgumentError("synth_generate dims must be positive");
  if (spec.noise < 0.0) throw ArgumentError("synth_generate noise must be >= 0");

  Dataset ds;
  ds.audio_length = spec.audio_length;
  ds.frames = spec.frames;
  ds.channels = spec.channels;
  ds.height = spec.height;
  ds.width = spec.width;
  ds.samples.reserve(spec.count);

  Rng label_rng(spec.seed);
  const Index L = spec.audio_length;
  const double pattern_period = static_cast<double>(std::max(spec.height, spec.width));

  for (std::size_t i = 0; i < spec.count; ++i) {
    Sample s;
    s.emotion = static_cast<int>(label_rng.below(kEmotionClasses));
    s.gender = static_cast<int>(label_rng.below(kGenderClasses));

    Rng rng = label_rng.derive(i);
    const double carrier_phase = rng.uniform(0.0, kTwoPi);
    const double pattern_phase = rng.uniform(0.0, kTwoPi);
    // clamped away from DC so a tail draw cannot turn the grating into a
    // constant offset that would contaminate the brightness channel
    const double pattern_freq =
        std::clamp(spec.pattern_cycles[static_cast<std::size_t>(s.emotion)] +
                       spec.pattern_jitter * rng.normal(),
                   0.5, 6.0);

    const double amp = spec.gender_amplitude[static_cast<std::size_t>(s.gender)];
    const double freq = spec.emotion_cycles[static_cast<std::size_t>(s.emotion)];
    // the emotion component is a fixed-phase template; only the gender
    // carrier gets a random phase, which the rms statistic ignores
    s.audio = Tensor({1, L});
    for (Index t = 0; t < L; ++t) {
      const double x = static_cast<double>(t) / static_cast<double>(L);
      double v = amp * std::sin(kTwoPi * spec.carrier_cycles * x + carrier_phase) +
                 spec.emotion_amplitude * std::sin(kTwoPi * freq * x);
      if (spec.noise > 0.0) v += spec.noise * rng.normal();
      s.audio[t] = f32(v);
    }

    const double bright = spec.gender_brightness[static_cast<std::size_t>(s.gender)];
    const double temporal_freq =
        spec.temporal_cycles[static_cast<std::size_t>(s.emotion)];
    const double temporal_phase = rng.uniform(0.0, kTwoPi);
    s.video = Tensor({spec.frames, spec.channels, spec.height, spec.width});
    Index idx = 0;
    for (Index t = 0; t < spec.frames; ++t) {
      const double frame_level =
          bright + spec.temporal_amplitude *
                       std::sin(kTwoPi * temporal_freq * static_cast<double>(t) /
                                    static_cast<double>(spec.frames) +
                                temporal_phase);
      for (Index c = 0; c < spec.channels; ++c)
        for (Index y = 0; y < spec.height; ++y)
          for (Index x = 0; x < spec.width; ++x) {
            const double phase =
                kTwoPi * pattern_freq * static_cast<double>(x) / pattern_period +
                pattern_phase;
            double v = frame_level + spec.pattern_amplitude * std::cos(phase);
            if (spec.noise > 0.0) v += spec.noise * rng.normal();
            s.video[idx++] = f32(v);
          }
    }

    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  io::atomic_write(path, [&dataset](std::ostream& out) {
    io::write_bytes(out, "MMGD", 4);
    io::write_u32(out, 1);  // version
    io::write_u64(out, dataset.size());
    io::write_u32(out, static_cast<std::uint32_t>(dataset.audio_length));
    io::write_u32(out, static_cast<std::uint32_t>(dataset.frames));
    io::write_u32(out, static_cast<std::uint32_t>(dataset.channels));
    io::write_u32(out, static_cast<std::uint32_t>(dataset.height));
    io::write_u32(out, static_cast<std::uint32_t>(dataset.width));
    for (const Sample& s : dataset.samples) {
      for (Index i = 0; i < s.audio.size(); ++i)
        io::write_f32(out, static_cast<float>(s.audio[i]));
      for (Index i = 0; i < s.video.size(); ++i)
        io::write_f32(out, static_cast<float>(s.video[i]));
      io::write_u8(out, static_cast<std::uint8_t>(s.emotion));
      io::write_u8(out, static_cast<std::uint8_t>(s.gender));
    }
  });
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  io::Reader r(in, "dataset " + path.string());

  if (r.read_string(4) != "MMGD") r.fail("bad magic");
  const std::uint32_t version = r.read_u32();
  if (version != 1) r.fail("unsupported version " + std::to_string(version));
  const std::uint64_t count = r.read_u64();

  Dataset ds;
  ds.audio_length = static_cast<Index>(r.read_u32());
  ds.frames = static_cast<Index>(r.read_u32());
  ds.channels = static_cast<Index>(r.read_u32());
  ds.height = static_cast<Index>(r.read_u32());
  ds.width = static_cast<Index>(r.read_u32());
  if (count > 0 && (ds.audio_length < 1 || ds.frames < 1 || ds.channels < 1 ||
                    ds.height < 1 || ds.width < 1))
    r.fail("non-positive dimensions");

  const Index video_size = ds.frames * ds.channels * ds.height * ds.width;
  ds.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Sample s;
    s.audio = Tensor({1, ds.audio_length});
    for (Index j = 0; j < ds.audio_length; ++j)
      s.audio[j] = static_cast<double>(r.read_f32());
    s.video = Tensor({ds.frames, ds.channels, ds.height, ds.width});
    for (Index j = 0; j < video_size; ++j)
      s.video[j] = static_cast<double>(r.read_f32());
    s.emotion = static_cast<int>(r.read_u8());
    s.gender = static_cast<int>(r.read_u8());
    if (s.emotion >= kEmotionClasses)
      r.fail("emotion label " + std::to_string(s.emotion) + " out of range");
    if (s.gender >= kGenderClasses)
      r.fail("gender label " + std::to_string(s.gender) + " out of range");
    ds.samples.push_back(std::move(s));
  }
  r.expect_eof();
  return ds;
}

}  // namespace mtlab
