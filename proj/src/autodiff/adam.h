// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "autodiff/params.h"

namespace vfkit::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are created zeroed on the first
// Step() and are bound to the parameter order of that call.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Throws Error(kDiverged) if any gradient is non-finite; parameters are
  // left untouched in that case.
  void Step(ParameterSet<T> &params);

  int64_t steps() const { return steps_; }
  const AdamConfig &config() const { return config_; }

 private:
  AdamConfig config_;
  int64_t steps_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace vfkit::ad
