// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "encoder/ge2e.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "common/io.h"

namespace vfkit::encoder {

using ad::Node;
using ad::Tensor;

template <typename T>
Tensor<T> Ge2eLoss(const Tensor<T> &embeddings, int speakers, int utterances,
                   const Tensor<T> &scale, const Tensor<T> &offset) {
  const int K = speakers, M = utterances;
  if (K < 2 || M < 2) ThrowInvalid("ge2e loss needs >= 2 speakers and >= 2 utterances");
  if (embeddings.rank() != 2 || embeddings.dim(0) != int64_t{K} * M)
    ThrowInvalid("ge2e loss: embeddings must be [K*M, D]");
  if (scale.numel() != 1 || offset.numel() != 1)
    ThrowInvalid("ge2e loss: scale and offset must be scalars");
  if (!(scale.item() > T(0))) ThrowInvalid("ge2e loss: scale must be positive");

  const int64_t n_rows = int64_t{K} * M, d = embeddings.dim(1);
  const T *e = embeddings.values().data();
  const double w = scale.item(), b = offset.item();

  std::vector<double> sums(K * d, 0.0);
  for (int j = 0; j < K; ++j)
    for (int i = 0; i < M; ++i)
      for (int64_t x = 0; x < d; ++x) sums[j * d + x] += e[(j * M + i) * d + x];

  // cos[n, k], softmax probabilities p[n, k], and cached norms.
  std::vector<double> cos(n_rows * K), prob(n_rows * K);
  std::vector<double> e_norm(n_rows), c_norm(n_rows * K);
  std::vector<double> centroid(d);
  auto centroid_of = [&](int64_t n, int k) {
    const int j = static_cast<int>(n / M);
    for (int64_t x = 0; x < d; ++x)
      centroid[x] = k == j ? (sums[k * d + x] - e[n * d + x]) / (M - 1)
                           : sums[k * d + x] / M;
  };
  double total = 0.0;
  for (int64_t n = 0; n < n_rows; ++n) {
    double en = 0.0;
    for (int64_t x = 0; x < d; ++x) en += double(e[n * d + x]) * e[n * d + x];
    e_norm[n] = std::sqrt(en);
    if (!(e_norm[n] > 0.0)) ThrowInvalid("ge2e loss: zero embedding");
    for (int k = 0; k < K; ++k) {
      centroid_of(n, k);
      double dot = 0.0, cn = 0.0;
      for (int64_t x = 0; x < d; ++x) {
        dot += e[n * d + x] * centroid[x];
        cn += centroid[x] * centroid[x];
      }
      c_norm[n * K + k] = std::sqrt(cn);
      if (!(c_norm[n * K + k] > 0.0)) ThrowInvalid("ge2e loss: degenerate centroid");
      cos[n * K + k] = dot / (e_norm[n] * c_norm[n * K + k]);
    }
    double peak = -INFINITY;
    for (int k = 0; k < K; ++k) peak = std::max(peak, w * cos[n * K + k] + b);
    double z = 0.0;
    for (int k = 0; k < K; ++k) {
      prob[n * K + k] = std::exp(w * cos[n * K + k] + b - peak);
      z += prob[n * K + k];
    }
    for (int k = 0; k < K; ++k) prob[n * K + k] /= z;
    const int j = static_cast<int>(n / M);
    total += -(w * cos[n * K + j] + b) + peak + std::log(z);
  }
  const T loss = static_cast<T>(total / n_rows);

  return Tensor<T>::MakeResult(
      {1}, {loss}, {embeddings, scale, offset},
      [=](Node<T> &self) mutable {
        const double g = self.grad[0] / static_cast<double>(n_rows);
        Node<T> &emb = *self.inputs[0];
        const T *ev = emb.value.data();
        double d_scale = 0.0, d_offset = 0.0;
        std::vector<double> d_e(n_rows * d, 0.0), d_sums(K * d, 0.0);
        std::vector<double> c(d);
        for (int64_t n = 0; n < n_rows; ++n) {
          const int j = static_cast<int>(n / M);
          for (int k = 0; k < K; ++k) {
            const double ds = g * (prob[n * K + k] - (k == j ? 1.0 : 0.0));
            d_scale += ds * cos[n * K + k];
            d_offset += ds;
            const double dcos = w * ds;
            for (int64_t x = 0; x < d; ++x)
              c[x] = k == j ? (sums[k * d + x] - ev[n * d + x]) / (M - 1)
                            : sums[k * d + x] / M;
            const double en = e_norm[n], cn = c_norm[n * K + k];
            const double cs = cos[n * K + k];
            const double share = k == j ? 1.0 / (M - 1) : 1.0 / M;
            for (int64_t x = 0; x < d; ++x) {
              d_e[n * d + x] += dcos * (c[x] / (en * cn) - cs * ev[n * d + x] / (en * en));
              const double dc = dcos * (ev[n * d + x] / (en * cn) - cs * c[x] / (cn * cn));
              d_sums[k * d + x] += dc * share;
              if (k == j) d_e[n * d + x] -= dc * share;
            }
          }
        }
        if (emb.requires_grad) {
          for (int64_t n = 0; n < n_rows; ++n) {
            const int j = static_cast<int>(n / M);
            for (int64_t x = 0; x < d; ++x)
              emb.grad[n * d + x] += static_cast<T>(d_e[n * d + x] + d_sums[j * d + x]);
          }
        }
        if (self.inputs[1]->requires_grad)
          self.inputs[1]->grad[0] += static_cast<T>(d_scale);
        if (self.inputs[2]->requires_grad)
          self.inputs[2]->grad[0] += static_cast<T>(d_offset);
      });
}

template Tensor<float> Ge2eLoss(const Tensor<float> &, int, int,
                                const Tensor<float> &, const Tensor<float> &);
template Tensor<double> Ge2eLoss(const Tensor<double> &, int, int,
                                 const Tensor<double> &, const Tensor<double> &);

}  // namespace vfkit::encoder
