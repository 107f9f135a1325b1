// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsp/stft.h"

#include <cmath>
#include <numbers>

#include "common/io.h"
#include "dsp/fft.h"

namespace vfkit::dsp {

void ValidateAudio(const AudioBuffer &audio) {
  if (audio.sample_rate != kSampleRate)
    ThrowInvalid("unsupported sample rate " +
                 std::to_string(audio.sample_rate) + " (16000 required)");
  for (double s : audio.samples)
    if (!std::isfinite(s)) ThrowInvalid("audio contains non-finite samples");
}

void ValidateStftConfig(const StftConfig &cfg) {
  if (cfg.fft_size < 2 || (cfg.fft_size & (cfg.fft_size - 1)) != 0)
    ThrowInvalid("fft_size must be a power of two");
  if (cfg.hop * 2 != cfg.fft_size)
    ThrowInvalid("hop must equal fft_size / 2");
}

std::vector<double> SqrtHannWindow(int size) {
  std::vector<double> w(size);
  for (int n = 0; n < size; ++n)
    w[n] = std::sin(std::numbers::pi * n / size);  // sqrt(0.5 - 0.5 cos)
  return w;
}

int64_t StftFrameCount(int64_t num_samples, const StftConfig &cfg) {
  if (num_samples < cfg.fft_size) return 0;
  return 1 + (num_samples - cfg.fft_size) / cfg.hop;
}

int64_t IstftLength(int64_t num_samples, const StftConfig &cfg) {
  const int64_t frames = StftFrameCount(num_samples, cfg);
  return frames == 0 ? 0 : (frames - 1) * cfg.hop + cfg.fft_size;
}

ComplexSpectrogram Stft(const AudioBuffer &audio, const StftConfig &cfg) {
  ValidateStftConfig(cfg);
  if (audio.size() < cfg.fft_size)
    ThrowInvalid("input too short: " + std::to_string(audio.size()) +
                 " samples, need at least " + std::to_string(cfg.fft_size));
  ComplexSpectrogram spec;
  spec.config = cfg;
  spec.frames = StftFrameCount(audio.size(), cfg);
  spec.bins = cfg.bins();
  spec.data.resize(spec.frames * spec.bins);

  const RealFft fft(cfg.fft_size);
  const std::vector<double> window = SqrtHannWindow(cfg.fft_size);
  std::vector<double> frame(cfg.fft_size);
  for (int64_t t = 0; t < spec.frames; ++t) {
    const double *src = audio.samples.data() + t * cfg.hop;
    for (int n = 0; n < cfg.fft_size; ++n) frame[n] = src[n] * window[n];
    fft.Forward(frame, std::span(spec.data).subspan(t * spec.bins, spec.bins));
  }
  return spec;
}

AudioBuffer Istft(const ComplexSpectrogram &spec) {
  const StftConfig &cfg = spec.config;
  ValidateStftConfig(cfg);
  if (spec.bins != cfg.bins() ||
      static_cast<int64_t>(spec.data.size()) != spec.frames * spec.bins)
    ThrowInvalid("malformed spectrogram");
  AudioBuffer out;
  if (spec.frames == 0) return out;
  out.samples.assign((spec.frames - 1) * cfg.hop + cfg.fft_size, 0.0);

  const RealFft fft(cfg.fft_size);
  const std::vector<double> window = SqrtHannWindow(cfg.fft_size);
  std::vector<double> frame(cfg.fft_size);
  for (int64_t t = 0; t < spec.frames; ++t) {
    fft.Inverse(std::span(spec.data).subspan(t * spec.bins, spec.bins), frame);
    double *dst = out.samples.data() + t * cfg.hop;
    for (int n = 0; n < cfg.fft_size; ++n) dst[n] += frame[n] * window[n];
  }
  return out;
}

MagnitudeSpectrogram Magnitude(const ComplexSpectrogram &spec) {
  MagnitudeSpectrogram mag;
  mag.frames = spec.frames;
  mag.bins = spec.bins;
  mag.data.resize(spec.data.size());
  for (size_t i = 0; i < spec.data.size(); ++i)
    mag.data[i] = std::abs(spec.data[i]);
  return mag;
}

MagnitudeSpectrogram PowerLawCompress(const MagnitudeSpectrogram &mag,
                                      double p) {
  if (!(p > 0.0 && p <= 1.0))
    ThrowInvalid("power-law exponent must be in (0, 1]");
  MagnitudeSpectrogram out = mag;
  for (double &x : out.data) {
    if (x < 0.0) ThrowInvalid("power_law_compress: negative magnitude");
    x = std::pow(x, p);
  }
  return out;
}

}  // namespace vfkit::dsp
