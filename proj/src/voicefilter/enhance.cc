// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "voicefilter/enhance.h"

#include <cmath>
#include <string>

#include "common/io.h"
#include "dsp/stft.h"

namespace vfkit::voicefilter {

dsp::AudioBuffer ApplyMask(const dsp::ComplexSpectrogram &noisy_spec,
                           const SoftMask &mask) {
  if (mask.frames != noisy_spec.frames || mask.bins != noisy_spec.bins)
    ThrowInvalid("mask " + std::to_string(mask.frames) + "x" + std::to_string(mask.bins) +
                 " does not match spectrogram " + std::to_string(noisy_spec.frames) + "x" +
                 std::to_string(noisy_spec.bins));
  dsp::ComplexSpectrogram out = noisy_spec;
  for (size_t i = 0; i < out.data.size(); ++i) {
    const double m = mask.data[i];
    if (!std::isfinite(m) || m < 0.0) ThrowInvalid("mask values must be finite and >= 0");
    out.data[i] *= m;
  }
  return dsp::Istft(out);
}

dsp::AudioBuffer Enhance(const dsp::AudioBuffer &noisy, const MaskProvider &mask_fn) {
  const dsp::ComplexSpectrogram spec = dsp::Stft(noisy);
  return ApplyMask(spec, mask_fn(dsp::Magnitude(spec)));
}

template <typename T>
dsp::AudioBuffer Enhance(const dsp::AudioBuffer &noisy,
                         const encoder::SpeakerEmbedding &dvec,
                         const VoiceFilterNet<T> &model) {
  return Enhance(noisy, [&](const dsp::MagnitudeSpectrogram &mag) {
    if (model.config().permutation_invariant) return ForwardMaskPair(mag, model).first;
    return ForwardMask(mag, dvec, model);
  });
}

MaskProvider NetworkMask(const VoiceFilterModel &model,
                         const encoder::SpeakerEmbedding &dvec) {
  return [&model, dvec](const dsp::MagnitudeSpectrogram &mag) {
    if (model.config().permutation_invariant) return ForwardMaskPair(mag, model).first;
    return ForwardMask(mag, dvec, model);
  };
}

SoftMask OracleRatioMask(const dsp::MagnitudeSpectrogram &clean,
                         const dsp::MagnitudeSpectrogram &interference, double eps) {
  if (clean.frames != interference.frames || clean.bins != interference.bins)
    ThrowInvalid("clean and interference spectrograms differ in shape");
  SoftMask m{clean.frames, clean.bins, std::vector<double>(clean.data.size())};
  for (size_t i = 0; i < m.data.size(); ++i)
    m.data[i] = clean.data[i] / (clean.data[i] + interference.data[i] + eps);
  return m;
}

SoftMask ConstantMask(int64_t frames, int64_t bins, double value) {
  return SoftMask{frames, bins, std::vector<double>(frames * bins, value)};
}

template dsp::AudioBuffer Enhance(const dsp::AudioBuffer &,
                                  const encoder::SpeakerEmbedding &,
                                  const VoiceFilterNet<float> &);
template dsp::AudioBuffer Enhance(const dsp::AudioBuffer &,
                                  const encoder::SpeakerEmbedding &,
                                  const VoiceFilterNet<double> &);

}  // namespace vfkit::voicefilter
