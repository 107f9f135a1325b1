// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "dsp/audio.h"

namespace vfkit::dsp {

// Periodic square-root Hann window. With hop == size/2 the squared window
// sums to exactly one, so analysis and synthesis use the same window.
std::vector<double> SqrtHannWindow(int size);

// Frames start at sample 0 and are not centered: T = 1 + (len - fft) / hop.
ComplexSpectrogram Stft(const AudioBuffer &audio, const StftConfig &cfg = {});

// Windowed overlap-add. Output has (T - 1) * hop + fft_size samples; only
// samples in [fft_size, len - fft_size) are fully overlapped.
AudioBuffer Istft(const ComplexSpectrogram &spec);

// Number of STFT frames for a signal of the given length (0 if too short).
int64_t StftFrameCount(int64_t num_samples, const StftConfig &cfg = {});

// Length of Istft(Stft(x)) for |x| == num_samples.
int64_t IstftLength(int64_t num_samples, const StftConfig &cfg = {});

MagnitudeSpectrogram Magnitude(const ComplexSpectrogram &spec);

// Element-wise mag^p for p in (0, 1].
MagnitudeSpectrogram PowerLawCompress(const MagnitudeSpectrogram &mag,
                                      double p);

}  // namespace vfkit::dsp
