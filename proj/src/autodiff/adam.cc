// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "autodiff/adam.h"

#include <cmath>

#include "common/io.h"

namespace vfkit::ad {

template <typename T>
void Adam<T>::Step(ParameterSet<T> &params) {
  const auto &entries = params.entries();
  for (const auto &[name, t] : entries)
    for (T g : t.grad())
      if (!std::isfinite(g))
        throw Error(Error::Kind::kDiverged,
                    "diverged: non-finite gradient in " + name);
  if (m_.empty()) {
    for (const auto &e : entries) {
      m_.emplace_back(e.second.numel(), 0.0);
      v_.emplace_back(e.second.numel(), 0.0);
    }
  }
  if (m_.size() != entries.size())
    ThrowInvalid("Adam: parameter set changed between steps");
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (size_t k = 0; k < entries.size(); ++k) {
    Tensor<T> t = entries[k].second;
    auto grad = t.grad();
    if (grad.empty()) continue;
    auto value = t.mutable_values();
    std::vector<double> &m = m_[k];
    std::vector<double> &v = v_[k];
    for (size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / c1, v_hat = v[i] / c2;
      value[i] = static_cast<T>(value[i] - config_.lr * m_hat /
                                               (std::sqrt(v_hat) + config_.eps));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace vfkit::ad
