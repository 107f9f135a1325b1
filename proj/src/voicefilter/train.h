// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autodiff/adam.h"
#include "autodiff/train_report.h"
#include "datagen/manifest.h"
#include "encoder/encoder.h"
#include "voicefilter/model.h"

namespace vfkit::voicefilter {

constexpr int64_t kSegmentSamples = 3 * dsp::kSampleRate;

struct VoiceFilterTrainConfig {
  int64_t steps = 2000;
  uint64_t seed = 0;
  int batch_size = 4;
  ad::AdamConfig adam{};
  double clip_grad_norm = 5.0;  // <= 0 disables clipping
  VoiceFilterConfig model = VoiceFilterConfig::Default();
  int64_t segment_samples = kSegmentSamples;
  // Write the checkpoint every N steps (0: only at the end).
  int64_t checkpoint_every = 0;
};

using DvectorTable = std::map<std::string, encoder::SpeakerEmbedding>;

// d-vector of every reference utterance named by the triplets.
DvectorTable ComputeDvectors(const datagen::CorpusManifest &manifest,
                             const std::vector<datagen::TrainingTriplet> &triplets,
                             const encoder::EncoderModel &encoder);

// Each step draws batch_size triplets and one crop offset per triplet from
// a stream seeded by (seed, step). Audio shorter than a segment is
// zero-padded at the end. The loss is the batch mean of the compressed mask
// loss (or of the permutation-invariant loss for that variant). A
// non-finite loss aborts with Error(kDiverged). When out is set the
// checkpoint also stores the encoder, if given.
VoiceFilterModel TrainVoiceFilter(const datagen::CorpusManifest &manifest,
                                  const std::vector<datagen::TrainingTriplet> &triplets,
                                  const DvectorTable &dvectors,
                                  const VoiceFilterTrainConfig &config,
                                  const ad::ProgressCallback &progress = {},
                                  const std::optional<std::filesystem::path> &out = {},
                                  const encoder::EncoderModel *encoder = nullptr);

}  // namespace vfkit::voicefilter
