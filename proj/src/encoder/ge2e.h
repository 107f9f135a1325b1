// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "autodiff/tensor.h"

namespace vfkit::encoder {

// Softmax contrastive loss over scaled cosine similarities to speaker
// centroids. Rows of embeddings [K*M, D] are grouped speaker-major (row
// j*M + i is utterance i of speaker j). A row's own centroid excludes the
// row itself. Similarity = scale * cos + offset; the result is the mean of
//   -S(ji, j) + log sum_k exp S(ji, k)
// over all rows. scale and offset are [1] tensors; scale must be positive.
template <typename T>
ad::Tensor<T> Ge2eLoss(const ad::Tensor<T> &embeddings, int speakers,
                       int utterances, const ad::Tensor<T> &scale,
                       const ad::Tensor<T> &offset);

}  // namespace vfkit::encoder
