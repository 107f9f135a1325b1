// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dsp/audio.h"

namespace vfkit::dsp {

// RIFF/WAVE, PCM 16-bit little-endian, 1 channel, 16000 Hz only. Anything
// else is rejected with a descriptive error; no resampling or downmixing.
AudioBuffer DecodeWav(std::string_view bytes);
AudioBuffer ReadWav(const std::filesystem::path &path);

// Samples are scaled by 32768 and rounded; values outside [-1, 1) are
// clamped and a warning is logged.
std::string EncodeWav(const AudioBuffer &audio);
void WriteWav(const std::filesystem::path &path, const AudioBuffer &audio);

}  // namespace vfkit::dsp
