// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "datagen/manifest.h"
#include "dsp/audio.h"

namespace vfkit::datagen {

// weight * interference tiled cyclically (or trimmed) to length samples.
dsp::AudioBuffer TileInterference(const dsp::AudioBuffer &interference,
                                  int64_t length, double weight);

// noisy[i] = clean[i] + weight * interference[i mod len(interference)],
// for i < len(clean).
dsp::AudioBuffer MixAudio(const dsp::AudioBuffer &clean,
                          const dsp::AudioBuffer &interference, double weight);

struct MixedTriplet {
  TrainingTriplet triplet;
  dsp::AudioBuffer noisy;
};

// Enforces: reference and clean are different utterances of one speaker,
// interference comes from another speaker, weight > 0.
MixedTriplet MakeTriplet(const UtteranceRecord &clean,
                         const dsp::AudioBuffer &clean_audio,
                         const UtteranceRecord &interference,
                         const dsp::AudioBuffer &interference_audio,
                         const UtteranceRecord &reference, double weight);

// Throws on any violated TrainingTriplet invariant.
void ValidateTriplet(const CorpusManifest &manifest, const TrainingTriplet &t);

// Audio of a triplet resolved against its corpus.
struct TripletAudio {
  dsp::AudioBuffer clean;
  dsp::AudioBuffer interference;  // weighted, tiled to len(clean)
  dsp::AudioBuffer noisy;
  dsp::AudioBuffer reference;
};
TripletAudio LoadTripletAudio(const CorpusManifest &manifest,
                              const TrainingTriplet &triplet);

enum class WeightMode { kFixed, kUniform01, kUniform02 };
WeightMode ParseWeightMode(const std::string &name);  // fixed | u01 | u02
const char *WeightModeName(WeightMode mode);

// Triplet i is drawn from an RNG stream derived from (seed, i) only.
std::vector<TrainingTriplet> SampleTriplets(const CorpusManifest &manifest,
                                            int64_t n, uint64_t seed,
                                            WeightMode mode = WeightMode::kFixed);

}  // namespace vfkit::datagen
