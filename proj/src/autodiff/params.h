// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "autodiff/tensor.h"
#include "common/rng.h"

namespace vfkit::ad {

// Named trainable tensors in insertion order. The order is the checkpoint
// order and is therefore part of the model format.
template <typename T>
class ParameterSet {
 public:
  // Adds a zero-filled tensor that tracks gradients.
  Tensor<T> Add(const std::string &name, Shape shape);
  Tensor<T> Get(const std::string &name) const;
  bool Contains(const std::string &name) const { return index_.count(name) > 0; }

  const std::vector<std::pair<std::string, Tensor<T>>> &entries() const {
    return entries_;
  }
  size_t size() const { return entries_.size(); }
  int64_t TotalElements() const;

  void ZeroGrad();
  // L2 norm over every gradient element (missing grads count as zero).
  double GradNorm() const;
  // Scales all gradients so their global norm is at most max_norm.
  void ClipGradNorm(double max_norm);

  // Deep copy into another precision; the copy has no gradient history.
  template <typename U>
  ParameterSet<U> Cast() const {
    ParameterSet<U> out;
    for (const auto &[name, t] : entries_) {
      Tensor<U> dst = out.Add(name, t.shape());
      auto src = t.values();
      auto d = dst.mutable_values();
      for (size_t i = 0; i < src.size(); ++i) d[i] = static_cast<U>(src[i]);
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
  std::map<std::string, size_t> index_;
};

template <typename T>
void InitUniform(Tensor<T> &t, double bound, Rng &rng);
// Glorot/Xavier uniform: bound = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void InitXavierUniform(Tensor<T> &t, int64_t fan_in, int64_t fan_out, Rng &rng);

}  // namespace vfkit::ad
