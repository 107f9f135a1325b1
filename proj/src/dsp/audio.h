// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace vfkit::dsp {

constexpr int kSampleRate = 16000;

// Mono PCM at 16 kHz. Samples are nominally in [-1, 1]; values outside that
// range are kept in memory and only clamped when written to disk.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
};

// Throws if the rate is not 16 kHz or any sample is non-finite.
void ValidateAudio(const AudioBuffer &audio);

enum class WindowKind { kSqrtHann };

struct StftConfig {
  int fft_size = 512;
  int hop = 256;
  WindowKind window = WindowKind::kSqrtHann;

  int bins() const { return fft_size / 2 + 1; }
};

void ValidateStftConfig(const StftConfig &cfg);

struct ComplexSpectrogram {
  int64_t frames = 0;
  int64_t bins = 0;
  std::vector<std::complex<double>> data;  // frame-major, frames x bins
  StftConfig config;

  std::complex<double> &at(int64_t t, int64_t f) { return data[t * bins + f]; }
  const std::complex<double> &at(int64_t t, int64_t f) const {
    return data[t * bins + f];
  }
};

struct MagnitudeSpectrogram {
  int64_t frames = 0;
  int64_t bins = 0;
  std::vector<double> data;  // frame-major, frames x bins

  double &at(int64_t t, int64_t f) { return data[t * bins + f]; }
  double at(int64_t t, int64_t f) const { return data[t * bins + f]; }
};

}  // namespace vfkit::dsp
