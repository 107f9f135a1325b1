// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eval/sdr.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "common/io.h"
#include "common/log.h"

namespace vfkit::eval {

double Sdr(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size()) {
    LogWarning("sdr: trimming estimate (" + std::to_string(estimate.size()) +
               ") and reference (" + std::to_string(reference.size()) +
               ") to the shorter length");
    const size_t n = std::min(estimate.size(), reference.size());
    estimate = estimate.first(n);
    reference = reference.first(n);
  }
  double ref_energy = 0.0, dot = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    if (!std::isfinite(estimate[i]) || !std::isfinite(reference[i]))
      ThrowInvalid("sdr: non-finite sample");
    ref_energy += reference[i] * reference[i];
    dot += estimate[i] * reference[i];
  }
  if (!(ref_energy > 0.0)) ThrowInvalid("sdr: zero-energy reference");
  const double alpha = dot / ref_energy;
  double target = 0.0, error = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    target += t * t;
    error += (t - estimate[i]) * (t - estimate[i]);
  }
  if (!(target > 0.0)) return -kSdrCapDb;
  if (error < 1e-12 * target) return kSdrCapDb;
  return std::clamp(10.0 * std::log10(target / error), -kSdrCapDb, kSdrCapDb);
}

double Sdr(const dsp::AudioBuffer &estimate, const dsp::AudioBuffer &reference) {
  return Sdr(std::span<const double>(estimate.samples),
             std::span<const double>(reference.samples));
}

dsp::AudioBuffer AlignLength(const dsp::AudioBuffer &audio, int64_t length) {
  if (length < 0) ThrowInvalid("negative length");
  dsp::AudioBuffer out = audio;
  out.samples.resize(static_cast<size_t>(length), 0.0);
  return out;
}

Aggregates Aggregate(std::span<const double> values) {
  if (values.empty()) ThrowInvalid("aggregate of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return {sum / static_cast<double>(n), median};
}

}  // namespace vfkit::eval
