// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "datagen/triplet.h"

#include "common/io.h"
#include "common/rng.h"

namespace vfkit::datagen {

dsp::AudioBuffer TileInterference(const dsp::AudioBuffer &interference,
                                  int64_t length, double weight) {
  if (interference.samples.empty()) ThrowInvalid("interference audio is empty");
  dsp::AudioBuffer out;
  out.samples.resize(length);
  const int64_t n = interference.size();
  for (int64_t i = 0; i < length; ++i)
    out.samples[i] = weight * interference.samples[i % n];
  return out;
}

dsp::AudioBuffer MixAudio(const dsp::AudioBuffer &clean,
                          const dsp::AudioBuffer &interference, double weight) {
  if (clean.samples.empty()) ThrowInvalid("clean audio is empty");
  dsp::AudioBuffer noisy = TileInterference(interference, clean.size(), weight);
  for (int64_t i = 0; i < clean.size(); ++i) noisy.samples[i] += clean.samples[i];
  return noisy;
}

MixedTriplet MakeTriplet(const UtteranceRecord &clean,
                         const dsp::AudioBuffer &clean_audio,
                         const UtteranceRecord &interference,
                         const dsp::AudioBuffer &interference_audio,
                         const UtteranceRecord &reference, double weight) {
  if (interference.speaker_id == clean.speaker_id)
    ThrowInvalid("interference '" + interference.utterance_id +
                 "' is from the target speaker " + clean.speaker_id);
  if (reference.utterance_id == clean.utterance_id)
    ThrowInvalid("reference must differ from the clean utterance '" +
                 clean.utterance_id + "'");
  if (reference.speaker_id != clean.speaker_id)
    ThrowInvalid("reference '" + reference.utterance_id +
                 "' is not from the target speaker " + clean.speaker_id);
  if (!(weight > 0.0)) ThrowInvalid("mixing weight must be positive");
  MixedTriplet out;
  out.triplet = {clean.utterance_id, interference.utterance_id,
                 reference.utterance_id, weight, ""};
  out.noisy = MixAudio(clean_audio, interference_audio, weight);
  return out;
}

void ValidateTriplet(const CorpusManifest &manifest, const TrainingTriplet &t) {
  const auto &clean = manifest.Find(t.clean_id);
  const auto &interf = manifest.Find(t.interference_id);
  const auto &ref = manifest.Find(t.reference_id);
  if (interf.speaker_id == clean.speaker_id)
    ThrowInvalid("triplet interference shares the target speaker");
  if (ref.utterance_id == clean.utterance_id)
    ThrowInvalid("triplet reference equals the clean utterance");
  if (ref.speaker_id != clean.speaker_id)
    ThrowInvalid("triplet reference is from a different speaker");
  if (!(t.weight > 0.0)) ThrowInvalid("triplet weight must be positive");
}

TripletAudio LoadTripletAudio(const CorpusManifest &manifest,
                              const TrainingTriplet &triplet) {
  ValidateTriplet(manifest, triplet);
  TripletAudio a;
  a.clean = LoadUtterance(manifest, triplet.clean_id);
  a.reference = LoadUtterance(manifest, triplet.reference_id);
  a.interference = TileInterference(LoadUtterance(manifest, triplet.interference_id),
                                    a.clean.size(), triplet.weight);
  a.noisy = a.clean;
  for (int64_t i = 0; i < a.noisy.size(); ++i)
    a.noisy.samples[i] += a.interference.samples[i];
  return a;
}

WeightMode ParseWeightMode(const std::string &name) {
  if (name == "fixed") return WeightMode::kFixed;
  if (name == "u01") return WeightMode::kUniform01;
  if (name == "u02") return WeightMode::kUniform02;
  ThrowInvalid("unknown weight mode '" + name + "' (fixed|u01|u02)");
}

const char *WeightModeName(WeightMode mode) {
  switch (mode) {
    case WeightMode::kUniform01: return "u01";
    case WeightMode::kUniform02: return "u02";
    case WeightMode::kFixed: break;
  }
  return "fixed";
}

std::vector<TrainingTriplet> SampleTriplets(const CorpusManifest &manifest,
                                            int64_t n, uint64_t seed,
                                            WeightMode mode) {
  if (n < 0) ThrowInvalid("triplet count must be non-negative");
  const auto by_speaker = manifest.BySpeaker();
  if (by_speaker.size() < 2)
    ThrowInvalid("infeasible manifest: need at least 2 speakers, found " +
                 std::to_string(by_speaker.size()));
  // Clean candidates: utterances whose speaker has a second utterance.
  std::vector<size_t> cleans;
  for (size_t i = 0; i < manifest.records.size(); ++i)
    if (by_speaker.at(manifest.records[i].speaker_id).size() >= 2) cleans.push_back(i);
  if (cleans.empty())
    ThrowInvalid("infeasible manifest: no speaker has at least 2 utterances");

  std::vector<TrainingTriplet> out;
  out.reserve(n);
  for (int64_t k = 0; k < n; ++k) {
    Rng rng(seed, static_cast<uint64_t>(k));
    const UtteranceRecord &clean = manifest.records[cleans[rng.Below(cleans.size())]];
    const auto &same = by_speaker.at(clean.speaker_id);
    size_t ref;
    do {
      ref = same[rng.Below(same.size())];
    } while (manifest.records[ref].utterance_id == clean.utterance_id);
    const size_t others = manifest.records.size() - same.size();
    uint64_t pick = rng.Below(others);
    size_t interf = 0;
    for (size_t i = 0; i < manifest.records.size(); ++i) {
      if (manifest.records[i].speaker_id == clean.speaker_id) continue;
      if (pick-- == 0) {
        interf = i;
        break;
      }
    }
    double weight = 1.0;
    if (mode == WeightMode::kUniform01) weight = rng.Uniform(0.0, 1.0);
    if (mode == WeightMode::kUniform02) weight = rng.Uniform(0.0, 2.0);
    // Uniform() may return exactly 0; weights must stay positive.
    if (weight <= 0.0) weight = 1e-6;
    out.push_back({clean.utterance_id, manifest.records[interf].utterance_id,
                   manifest.records[ref].utterance_id, weight, ""});
  }
  return out;
}

}  // namespace vfkit::datagen
