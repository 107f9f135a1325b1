// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>

#include "autodiff/tensor.h"
#include "dsp/audio.h"

namespace vfkit::voicefilter {

// Mean over T x F of ((mask * |X|)^p - |S|^p)^2.
//   mask [T, F] tensor; noisy and clean magnitudes of T * F values.
// The derivative uses max(mask, smallest normal) so a saturated sigmoid
// yields a finite gradient.
template <typename T>
ad::Tensor<T> CompressedMaskLoss(const ad::Tensor<T> &mask, std::span<const T> noisy_mag,
                                 std::span<const T> clean_mag, double p = 0.3);

template <typename T>
ad::Tensor<T> CompressedMaskLoss(const ad::Tensor<T> &mask,
                                 const dsp::MagnitudeSpectrogram &noisy_mag,
                                 const dsp::MagnitudeSpectrogram &clean_mag,
                                 double p = 0.3);

// Permutation-invariant pair loss: the smaller of
//   L(a, S) + L(b, I)   and   L(a, I) + L(b, S).
// Swapping the masks leaves the value unchanged.
template <typename T>
ad::Tensor<T> PermutationInvariantLoss(const ad::Tensor<T> &mask_a,
                                       const ad::Tensor<T> &mask_b,
                                       std::span<const T> noisy_mag,
                                       std::span<const T> clean_mag,
                                       std::span<const T> interference_mag,
                                       double p = 0.3);

}  // namespace vfkit::voicefilter
