// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>

#include "dsp/audio.h"

namespace vfkit::eval {

// Reported values are clamped to [-kSdrCapDb, kSdrCapDb].
constexpr double kSdrCapDb = 120.0;

// Projection form: a = <est, ref> / |ref|^2, target = a * ref,
//   sdr = 10 log10(|target|^2 / |target - est|^2).
// Returns +120 dB when the error energy is below 1e-12 of the target energy
// and -120 dB when the target energy is zero (estimate orthogonal to the
// reference). Unequal lengths are trimmed to the shorter with a warning.
// A zero-energy reference is an error.
double Sdr(std::span<const double> estimate, std::span<const double> reference);
double Sdr(const dsp::AudioBuffer &estimate, const dsp::AudioBuffer &reference);

// Zero-pads or trims to length samples.
dsp::AudioBuffer AlignLength(const dsp::AudioBuffer &audio, int64_t length);

struct Aggregates {
  double mean = 0.0;
  double median = 0.0;
};

// Arithmetic mean; median of the sorted values (mean of the two middle ones
// for an even count). Empty input is an error.
Aggregates Aggregate(std::span<const double> values);

}  // namespace vfkit::eval
