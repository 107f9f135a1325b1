// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "autodiff/params.h"

#include <cmath>

#include "common/io.h"

namespace vfkit::ad {

template <typename T>
Tensor<T> ParameterSet<T>::Add(const std::string &name, Shape shape) {
  if (index_.count(name)) ThrowInvalid("duplicate parameter name " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, Tensor<T>::Zeros(std::move(shape), true));
  return entries_.back().second;
}

template <typename T>
Tensor<T> ParameterSet<T>::Get(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) ThrowInvalid("no parameter named " + name);
  return entries_[it->second].second;
}

template <typename T>
int64_t ParameterSet<T>::TotalElements() const {
  int64_t n = 0;
  for (const auto &e : entries_) n += e.second.numel();
  return n;
}

template <typename T>
void ParameterSet<T>::ZeroGrad() {
  for (auto &e : entries_) e.second.ZeroGrad();
}

template <typename T>
double ParameterSet<T>::GradNorm() const {
  double s = 0.0;
  for (const auto &e : entries_)
    for (T g : e.second.grad()) s += static_cast<double>(g) * g;
  return std::sqrt(s);
}

template <typename T>
void ParameterSet<T>::ClipGradNorm(double max_norm) {
  const double norm = GradNorm();
  if (!(norm > max_norm) || !std::isfinite(norm)) return;
  const T scale = static_cast<T>(max_norm / norm);
  for (auto &e : entries_)
    if (!e.second.grad().empty())
      for (T &g : e.second.mutable_grad()) g *= scale;
}

template <typename T>
void InitUniform(Tensor<T> &t, double bound, Rng &rng) {
  for (T &v : t.mutable_values()) v = static_cast<T>(rng.Uniform(-bound, bound));
}

template <typename T>
void InitXavierUniform(Tensor<T> &t, int64_t fan_in, int64_t fan_out, Rng &rng) {
  InitUniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template void InitUniform(Tensor<float> &, double, Rng &);
template void InitUniform(Tensor<double> &, double, Rng &);
template void InitXavierUniform(Tensor<float> &, int64_t, int64_t, Rng &);
template void InitXavierUniform(Tensor<double> &, int64_t, int64_t, Rng &);

}  // namespace vfkit::ad
