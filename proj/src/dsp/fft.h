// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <span>

namespace vfkit::dsp {

// Real-input DFT of a fixed power-of-two size backed by FFTW. Instances are
// cheap handles onto a process-wide plan cache; Forward/Inverse are safe to
// call concurrently.
class RealFft {
 public:
  explicit RealFft(int size);

  int size() const { return size_; }

  // in: size() reals; out: size()/2 + 1 bins.
  void Forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;
  // in: size()/2 + 1 bins; out: size() reals, scaled by 1/size().
  void Inverse(std::span<const std::complex<double>> in,
               std::span<double> out) const;

 private:
  int size_;
  void *forward_plan_;
  void *inverse_plan_;
};

}  // namespace vfkit::dsp
