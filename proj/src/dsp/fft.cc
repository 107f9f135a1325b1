// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsp/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "common/io.h"

namespace vfkit::dsp {
namespace {

struct Plans {
  fftw_plan forward;
  fftw_plan inverse;
};

// FFTW planning is not thread-safe; execution of an existing plan with new
// arrays is.
std::mutex g_plan_mutex;

const Plans &GetPlans(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> real(n);
  std::vector<fftw_complex> cplx(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans plans;
  plans.forward = fftw_plan_dft_r2c_1d(n, real.data(), cplx.data(), flags);
  plans.inverse = fftw_plan_dft_c2r_1d(n, cplx.data(), real.data(), flags);
  return cache.emplace(n, plans).first->second;
}

}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size < 2 || (size & (size - 1)) != 0)
    ThrowInvalid("fft size must be a power of two, got " + std::to_string(size));
  const Plans &plans = GetPlans(size);
  forward_plan_ = plans.forward;
  inverse_plan_ = plans.inverse;
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  if (static_cast<int>(in.size()) != size_ ||
      static_cast<int>(out.size()) != size_ / 2 + 1)
    ThrowInvalid("RealFft::Forward: buffer size mismatch");
  // r2c does not modify its input.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_),
                       const_cast<double *>(in.data()),
                       reinterpret_cast<fftw_complex *>(out.data()));
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) const {
  if (static_cast<int>(out.size()) != size_ ||
      static_cast<int>(in.size()) != size_ / 2 + 1)
    ThrowInvalid("RealFft::Inverse: buffer size mismatch");
  // c2r overwrites its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex *>(scratch.data()),
                       out.data());
  const double scale = 1.0 / size_;
  for (double &x : out) x *= scale;
}

}  // namespace vfkit::dsp
