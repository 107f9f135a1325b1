// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "voicefilter/loss.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "autodiff/ops.h"
#include "common/io.h"

namespace vfkit::voicefilter {

using ad::Tensor;

template <typename T>
Tensor<T> CompressedMaskLoss(const Tensor<T> &mask, std::span<const T> noisy_mag,
                             std::span<const T> clean_mag, double p) {
  const int64_t n = mask.numel();
  if (mask.rank() != 2)
    ThrowInvalid("mask must be [frames, bins], got " + ad::ShapeToString(mask.shape()));
  if (static_cast<int64_t>(noisy_mag.size()) != n ||
      static_cast<int64_t>(clean_mag.size()) != n)
    ThrowInvalid("mask " + ad::ShapeToString(mask.shape()) + " does not match " +
                 std::to_string(noisy_mag.size()) + " noisy / " +
                 std::to_string(clean_mag.size()) + " clean magnitudes");
  if (!(p > 0.0 && p <= 1.0)) ThrowInvalid("power must be in (0, 1]");
  if (n == 0) ThrowInvalid("empty mask");
  const T pw = static_cast<T>(p);
  auto m = mask.values();
  std::vector<T> noisy_c(n), diff(n);
  T total = 0;
  for (int64_t i = 0; i < n; ++i) {
    if (noisy_mag[i] < T(0) || clean_mag[i] < T(0))
      ThrowInvalid("negative magnitude");
    noisy_c[i] = std::pow(noisy_mag[i], pw);
    diff[i] = std::pow(m[i] * noisy_mag[i], pw) - std::pow(clean_mag[i], pw);
    total += diff[i] * diff[i];
  }
  const T inv_n = T(1) / static_cast<T>(n);
  return Tensor<T>::MakeResult(
      {1}, {total * inv_n}, {mask},
      [m_node = mask.shared_node(), noisy_c = std::move(noisy_c),
       diff = std::move(diff), pw, inv_n](ad::Node<T> &self) {
        m_node->EnsureGrad();
        const T g = self.grad[0] * T(2) * inv_n * pw;
        const T floor = std::numeric_limits<T>::min();
        for (size_t i = 0; i < diff.size(); ++i) {
          if (noisy_c[i] == T(0)) continue;
          const T mi = std::max(m_node->value[i], floor);
          m_node->grad[i] += g * diff[i] * noisy_c[i] * std::pow(mi, pw - T(1));
        }
      });
}

template <typename T>
Tensor<T> CompressedMaskLoss(const Tensor<T> &mask,
                             const dsp::MagnitudeSpectrogram &noisy_mag,
                             const dsp::MagnitudeSpectrogram &clean_mag, double p) {
  if (noisy_mag.frames != clean_mag.frames || noisy_mag.bins != clean_mag.bins)
    ThrowInvalid("noisy and clean spectrograms differ in shape");
  if (mask.rank() != 2 || mask.dim(0) != noisy_mag.frames || mask.dim(1) != noisy_mag.bins)
    ThrowInvalid("mask " + ad::ShapeToString(mask.shape()) + " does not match spectrogram " +
                 std::to_string(noisy_mag.frames) + "x" + std::to_string(noisy_mag.bins));
  std::vector<T> x(noisy_mag.data.begin(), noisy_mag.data.end());
  std::vector<T> s(clean_mag.data.begin(), clean_mag.data.end());
  return CompressedMaskLoss<T>(mask, std::span<const T>(x), std::span<const T>(s), p);
}

template <typename T>
Tensor<T> PermutationInvariantLoss(const Tensor<T> &mask_a, const Tensor<T> &mask_b,
                                   std::span<const T> noisy_mag,
                                   std::span<const T> clean_mag,
                                   std::span<const T> interference_mag, double p) {
  if (mask_a.shape() != mask_b.shape())
    ThrowInvalid("the two masks differ in shape");
  Tensor<T> keep = ad::Add(CompressedMaskLoss(mask_a, noisy_mag, clean_mag, p),
                           CompressedMaskLoss(mask_b, noisy_mag, interference_mag, p));
  Tensor<T> swap = ad::Add(CompressedMaskLoss(mask_a, noisy_mag, interference_mag, p),
                           CompressedMaskLoss(mask_b, noisy_mag, clean_mag, p));
  return ad::Minimum(keep, swap);
}

#define VFKIT_INSTANTIATE(T)                                                          \
  template Tensor<T> CompressedMaskLoss(const Tensor<T> &, std::span<const T>,        \
                                        std::span<const T>, double);                  \
  template Tensor<T> CompressedMaskLoss(const Tensor<T> &,                            \
                                        const dsp::MagnitudeSpectrogram &,            \
                                        const dsp::MagnitudeSpectrogram &, double);   \
  template Tensor<T> PermutationInvariantLoss(const Tensor<T> &, const Tensor<T> &,   \
                                              std::span<const T>, std::span<const T>, \
                                              std::span<const T>, double);
VFKIT_INSTANTIATE(float)
VFKIT_INSTANTIATE(double)
#undef VFKIT_INSTANTIATE

}  // namespace vfkit::voicefilter
