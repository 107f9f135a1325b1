// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>

#include "autodiff/adam.h"
#include "autodiff/train_report.h"
#include "datagen/manifest.h"
#include "encoder/encoder.h"

namespace vfkit::encoder {

struct EncoderTrainConfig {
  int64_t steps = 500;
  uint64_t seed = 0;
  int speakers_per_batch = 4;
  int utterances_per_speaker = 3;
  ad::AdamConfig adam{};
  double clip_grad_norm = 3.0;  // <= 0 disables clipping
  EncoderConfig model{};
  // Write the checkpoint every N steps (0: only at the end).
  int64_t checkpoint_every = 0;
};

// Each step draws K speakers and M utterances per speaker from a stream
// seeded by (seed, step), crops one random 160-frame window per utterance
// and takes an Adam step on the contrastive loss. The loss scale is kept
// at or above 1e-3.
EncoderModel TrainEncoder(const datagen::CorpusManifest &manifest,
                          const EncoderTrainConfig &config,
                          const ad::ProgressCallback &progress = {},
                          const std::optional<std::filesystem::path> &out = {});

}  // namespace vfkit::encoder
