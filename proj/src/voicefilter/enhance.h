// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>

#include "dsp/audio.h"
#include "encoder/encoder.h"
#include "voicefilter/model.h"

namespace vfkit::voicefilter {

// Produces a mask for a noisy magnitude spectrogram. Lets tests and the
// evaluator substitute oracle or constant masks for the network.
using MaskProvider = std::function<SoftMask(const dsp::MagnitudeSpectrogram &)>;

// istft(mask * X): scales each bin's magnitude and keeps the noisy phase.
// Mask values must be finite and non-negative.
dsp::AudioBuffer ApplyMask(const dsp::ComplexSpectrogram &noisy_spec,
                           const SoftMask &mask);

dsp::AudioBuffer Enhance(const dsp::AudioBuffer &noisy, const MaskProvider &mask_fn);

template <typename T>
dsp::AudioBuffer Enhance(const dsp::AudioBuffer &noisy,
                         const encoder::SpeakerEmbedding &dvec,
                         const VoiceFilterNet<T> &model);

// Mask provider backed by a trained network and a fixed d-vector. For the
// permutation-invariant variant the first mask is used.
MaskProvider NetworkMask(const VoiceFilterModel &model,
                         const encoder::SpeakerEmbedding &dvec);

// |S| / (|S| + |I| + eps) per bin.
SoftMask OracleRatioMask(const dsp::MagnitudeSpectrogram &clean,
                         const dsp::MagnitudeSpectrogram &interference,
                         double eps = 1e-8);

SoftMask ConstantMask(int64_t frames, int64_t bins, double value);

}  // namespace vfkit::voicefilter
