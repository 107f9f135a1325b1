// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsp/mel.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "common/io.h"
#include "dsp/fft.h"

namespace vfkit::dsp {

int MelConfig::frame_length() const {
  return static_cast<int>(std::lround(frame_len_ms * kSampleRate / 1000.0));
}
int MelConfig::frame_shift() const {
  return static_cast<int>(std::lround(frame_hop_ms * kSampleRate / 1000.0));
}
int MelConfig::fft_size() const {
  int n = 1;
  while (n < frame_length()) n <<= 1;
  return n;
}

void ValidateMelConfig(const MelConfig &cfg) {
  if (cfg.n_mels < 1) ThrowInvalid("n_mels must be >= 1");
  if (cfg.frame_hop_ms <= 0 || cfg.frame_hop_ms > cfg.frame_len_ms)
    ThrowInvalid("mel frame hop must be in (0, frame_len]");
  if (!(cfg.floor > 0)) ThrowInvalid("log floor must be positive");
  if (!(cfg.low_hz >= 0 && cfg.low_hz < cfg.high_hz &&
        cfg.high_hz <= kSampleRate / 2.0))
    ThrowInvalid("mel band edges out of range");
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

FeatureMatrix MelFilterbank(const MelConfig &cfg) {
  ValidateMelConfig(cfg);
  const int fft = cfg.fft_size();
  const int bins = fft / 2 + 1;
  const double lo = HzToMel(cfg.low_hz), hi = HzToMel(cfg.high_hz);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int m = 0; m < cfg.n_mels + 2; ++m)
    edges[m] = MelToHz(lo + (hi - lo) * m / (cfg.n_mels + 1));

  FeatureMatrix fb;
  fb.rows = cfg.n_mels;
  fb.cols = bins;
  fb.data.assign(fb.rows * fb.cols, 0.0);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * kSampleRate / fft;
      double w = 0.0;
      if (hz > left && hz <= center)
        w = (hz - left) / (center - left);
      else if (hz > center && hz < right)
        w = (right - hz) / (right - center);
      fb.at(m, k) = w;
    }
  }
  return fb;
}

FeatureMatrix LogMel(const AudioBuffer &audio, const MelConfig &cfg) {
  ValidateMelConfig(cfg);
  const int len = cfg.frame_length(), shift = cfg.frame_shift();
  if (audio.size() < len)
    ThrowInvalid("input too short for one mel frame: " +
                 std::to_string(audio.size()) + " samples");
  const int fft_size = cfg.fft_size();
  const int bins = fft_size / 2 + 1;
  const FeatureMatrix fb = MelFilterbank(cfg);

  std::vector<double> window(len);
  for (int n = 0; n < len; ++n)
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / len);

  FeatureMatrix out;
  out.rows = 1 + (audio.size() - len) / shift;
  out.cols = cfg.n_mels;
  out.data.resize(out.rows * out.cols);

  const RealFft fft(fft_size);
  std::vector<double> frame(fft_size, 0.0);
  std::vector<std::complex<double>> spec(bins);
  std::vector<double> power(bins);
  for (int64_t t = 0; t < out.rows; ++t) {
    const double *src = audio.samples.data() + t * shift;
    for (int n = 0; n < len; ++n) frame[n] = src[n] * window[n];
    fft.Forward(frame, spec);
    for (int k = 0; k < bins; ++k) power[k] = std::norm(spec[k]);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      const double *w = &fb.data[m * bins];
      for (int k = 0; k < bins; ++k) e += w[k] * power[k];
      out.at(t, m) = std::log(e + cfg.floor);
    }
  }
  return out;
}

}  // namespace vfkit::dsp
