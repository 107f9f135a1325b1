// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "datagen/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "common/io.h"
#include "common/rng.h"
#include "dsp/wav.h"

namespace vfkit::datagen {
namespace {

constexpr int kSemitoneSlots = 25;  // 110 Hz .. 440 Hz inclusive
constexpr double kMaxHarmonicHz = 7000.0;
constexpr double kPeakLevel = 0.45;
constexpr double kNoiseFloor = 1e-3;

std::string SpeakerId(int s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%02d", s);
  return buf;
}

}  // namespace

double ToySpeaker::Envelope(double hz) const {
  double a = 0.05;
  for (int k = 0; k < 2; ++k) {
    const double z = (hz - peak_hz[k]) / peak_width_hz[k];
    a += peak_gain[k] * std::exp(-0.5 * z * z);
  }
  return a;
}

std::vector<ToySpeaker> MakeToySpeakers(int n_speakers, uint64_t seed) {
  if (n_speakers < 2) ThrowInvalid("synth: need at least 2 speakers");
  if (n_speakers > kSemitoneSlots)
    ThrowInvalid("synth: at most 25 speakers fit the 110-440 Hz semitone grid");
  Rng rng(seed, 0x73706b);
  std::vector<int> slots(kSemitoneSlots);
  for (int i = 0; i < kSemitoneSlots; ++i) slots[i] = i;
  for (int i = 0; i < n_speakers; ++i)
    std::swap(slots[i], slots[i + rng.Below(kSemitoneSlots - i)]);

  std::vector<ToySpeaker> speakers(n_speakers);
  for (int s = 0; s < n_speakers; ++s) {
    ToySpeaker &sp = speakers[s];
    sp.id = SpeakerId(s);
    sp.semitone = slots[s];
    sp.f0 = 110.0 * std::pow(2.0, sp.semitone / 12.0);
    sp.peak_hz[0] = rng.Uniform(300.0, 1000.0);
    sp.peak_hz[1] = rng.Uniform(1200.0, 3200.0);
    sp.peak_width_hz[0] = rng.Uniform(80.0, 250.0);
    sp.peak_width_hz[1] = rng.Uniform(150.0, 500.0);
    sp.peak_gain[0] = 1.0;
    sp.peak_gain[1] = rng.Uniform(0.3, 0.9);
  }
  return speakers;
}

dsp::AudioBuffer SynthesizeUtterance(const ToySpeaker &speaker, uint64_t seed,
                                     int utterance_index) {
  Rng rng(seed, (static_cast<uint64_t>(speaker.semitone + 1) << 32) |
                    static_cast<uint64_t>(utterance_index));
  const double fs = dsp::kSampleRate;
  const int64_t n = static_cast<int64_t>(std::llround(rng.Uniform(3.0, 5.0) * fs));

  // Syllable envelope: alternating off/on segments with 20 ms cosine ramps.
  std::vector<double> env(n, 0.0);
  const int64_t ramp = static_cast<int64_t>(0.02 * fs);
  int64_t pos = static_cast<int64_t>(rng.Uniform(0.0, 0.2) * fs);
  while (pos < n) {
    const int64_t len = static_cast<int64_t>(rng.Uniform(0.15, 0.4) * fs);
    const double level = rng.Uniform(0.6, 1.0);
    for (int64_t i = 0; i < len && pos + i < n; ++i) {
      double g = 1.0;
      if (i < ramp) g = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
      if (len - 1 - i < ramp)
        g = std::min(g, 0.5 - 0.5 * std::cos(std::numbers::pi * (len - 1 - i) / ramp));
      env[pos + i] = level * g;
    }
    pos += len + static_cast<int64_t>(rng.Uniform(0.05, 0.25) * fs);
  }

  const double offset = 1.0 + rng.Uniform(-0.01, 0.01);
  const double depth = 0.015;
  const double rate_hz = rng.Uniform(0.5, 2.0);
  const double contour_phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  const int harmonics = static_cast<int>(kMaxHarmonicHz / (speaker.f0 * 1.04));
  std::vector<double> amp(harmonics), phase0(harmonics);
  for (int h = 0; h < harmonics; ++h) {
    amp[h] = speaker.Envelope((h + 1) * speaker.f0) / std::sqrt(h + 1.0);
    phase0[h] = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  }

  dsp::AudioBuffer audio;
  audio.samples.assign(n, 0.0);
  double phase = 0.0;
  double peak = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double t = i / fs;
    const double f = speaker.f0 * offset *
                     (1.0 + depth * std::sin(2.0 * std::numbers::pi * rate_hz * t +
                                             contour_phase));
    phase += 2.0 * std::numbers::pi * f / fs;
    if (env[i] == 0.0) continue;
    double s = 0.0;
    for (int h = 0; h < harmonics; ++h) s += amp[h] * std::sin((h + 1) * phase + phase0[h]);
    audio.samples[i] = env[i] * s;
    peak = std::max(peak, std::abs(audio.samples[i]));
  }
  const double gain = peak > 0.0 ? kPeakLevel / peak : 0.0;
  for (double &x : audio.samples) x = x * gain + kNoiseFloor * rng.Gaussian();
  return audio;
}

CorpusManifest SynthToyCorpus(const SynthOptions &options,
                              const std::filesystem::path &out_dir) {
  if (options.utts_per_speaker < 1) ThrowInvalid("synth: need at least 1 utterance per speaker");
  if (options.test_speakers < 0 || options.test_speakers >= options.n_speakers)
    ThrowInvalid("synth: test speakers must leave at least one training speaker");
  const auto speakers = MakeToySpeakers(options.n_speakers, options.seed);
  CorpusManifest all, train, test;
  for (auto *m : {&all, &train, &test}) m->base_dir = out_dir;
  train.split = "train";
  test.split = "test";
  for (int s = 0; s < options.n_speakers; ++s) {
    for (int u = 0; u < options.utts_per_speaker; ++u) {
      char name[32];
      std::snprintf(name, sizeof(name), "%s_utt%02d", speakers[s].id.c_str(), u);
      const dsp::AudioBuffer audio = SynthesizeUtterance(speakers[s], options.seed, u);
      UtteranceRecord rec{name, speakers[s].id, std::string("wav/") + name + ".wav",
                          static_cast<double>(audio.size()) / dsp::kSampleRate};
      dsp::WriteWav(out_dir / rec.path, audio);
      all.records.push_back(rec);
      (s >= options.n_speakers - options.test_speakers ? test : train)
          .records.push_back(rec);
    }
  }
  WriteManifest(out_dir / "manifest.jsonl", all);
  if (options.test_speakers > 0) {
    WriteManifest(out_dir / "train.jsonl", train);
    WriteManifest(out_dir / "test.jsonl", test);
  }
  return all;
}

}  // namespace vfkit::datagen
