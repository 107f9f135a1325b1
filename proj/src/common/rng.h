// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <random>

namespace vfkit {

// Seeded random source. All draws are implemented on top of the raw
// mt19937_64 stream (not std:: distributions) so sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : Rng(seed, 0) {}
  // Independent stream for (seed, stream), e.g. one per triplet index.
  Rng(uint64_t seed, uint64_t stream);

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n), rejection-sampled; n must be > 0.
  uint64_t Below(uint64_t n);
  double Gaussian();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vfkit
