// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "datagen/manifest.h"
#include "dsp/audio.h"

namespace vfkit::datagen {

// A synthetic "voice": fixed fundamental on a semitone grid over 110-440 Hz
// and a two-peak spectral envelope.
struct ToySpeaker {
  std::string id;
  int semitone = 0;  // f0 = 110 * 2^(semitone / 12), semitone in [0, 24]
  double f0 = 0.0;
  double peak_hz[2] = {0.0, 0.0};
  double peak_width_hz[2] = {0.0, 0.0};
  double peak_gain[2] = {0.0, 0.0};

  double Envelope(double hz) const;
};

// Distinct semitones, so any two speakers differ by >= 1 semitone.
// At most 25 speakers.
std::vector<ToySpeaker> MakeToySpeakers(int n_speakers, uint64_t seed);

// 3-5 s of amplitude-modulated harmonics with random on/off syllables, a
// slight pitch contour and a -60 dBFS noise floor. Deterministic in
// (seed, speaker, utterance index).
dsp::AudioBuffer SynthesizeUtterance(const ToySpeaker &speaker, uint64_t seed,
                                     int utterance_index);

struct SynthOptions {
  int n_speakers = 8;
  int utts_per_speaker = 10;
  uint64_t seed = 0;
  // The last test_speakers speakers go to test.jsonl, the rest to
  // train.jsonl. With 0 only manifest.jsonl is written.
  int test_speakers = 0;
};

// Writes out_dir/wav/*.wav and out_dir/manifest.jsonl (plus train/test
// manifests when requested). Returns the full manifest.
CorpusManifest SynthToyCorpus(const SynthOptions &options,
                              const std::filesystem::path &out_dir);

}  // namespace vfkit::datagen
