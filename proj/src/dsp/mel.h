// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "dsp/audio.h"

namespace vfkit::dsp {

struct MelConfig {
  int n_mels = 40;
  double frame_len_ms = 25.0;
  double frame_hop_ms = 10.0;
  double floor = 1e-10;
  double low_hz = 125.0;
  double high_hz = 7500.0;

  int frame_length() const;  // samples
  int frame_shift() const;   // samples
  int fft_size() const;      // next power of two >= frame_length()
};

void ValidateMelConfig(const MelConfig &cfg);

// Row-major frames x dims matrix of real features.
struct FeatureMatrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;

  double &at(int64_t r, int64_t c) { return data[r * cols + c]; }
  double at(int64_t r, int64_t c) const { return data[r * cols + c]; }
};

double HzToMel(double hz);  // HTK: 2595 log10(1 + f / 700)
double MelToHz(double mel);

// n_mels x (fft_size/2 + 1) triangular weights, centers equally spaced on
// the mel scale between low_hz and high_hz.
FeatureMatrix MelFilterbank(const MelConfig &cfg);

// Log mel filterbank energies: log(E + floor), one row per 10 ms hop.
// Power spectrum of a Hann-windowed frame zero-padded to fft_size().
FeatureMatrix LogMel(const AudioBuffer &audio, const MelConfig &cfg = {});

}  // namespace vfkit::dsp
