// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "autodiff/params.h"
#include "json.hpp"

namespace vfkit::ad {

constexpr int kCheckpointFormatVersion = 1;

// On-disk layout:
//   bytes 0..3   magic "VFCK"
//   bytes 4..7   header length N, uint32 little-endian
//   next N bytes JSON header: {"format_version", "model_kind", ...,
//                "tensors": [{"name", "shape"}, ...]}
//   remainder    float32 little-endian values of each tensor, header order
struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  nlohmann::json header;  // includes "tensors"
  std::vector<TensorRecord> tensors;

  const std::string model_kind() const;
};

// meta supplies model_kind and model-specific fields; format_version and
// tensors are filled in here.
std::string EncodeCheckpoint(const nlohmann::json &meta,
                             const ParameterSet<float> &params);
Checkpoint DecodeCheckpoint(const std::string &bytes);

void WriteCheckpoint(const std::filesystem::path &path,
                     const nlohmann::json &meta,
                     const ParameterSet<float> &params);
Checkpoint ReadCheckpoint(const std::filesystem::path &path);

// Copies checkpoint tensors whose names start with prefix into params (with
// the prefix stripped). Every parameter must be present with an identical
// shape, in the same order.
void LoadParameters(const Checkpoint &ckpt, ParameterSet<float> &params,
                    const std::string &prefix = "");

}  // namespace vfkit::ad
