// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>

namespace vfkit::ad {

struct TrainStepReport {
  int64_t step = 0;  // 1-based
  double loss = 0.0;
  double grad_norm = 0.0;  // before clipping
};

using ProgressCallback = std::function<void(const TrainStepReport &)>;

}  // namespace vfkit::ad
