// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "autodiff/tensor.h"

namespace vfkit::ad {

enum class Activation { kNone, kRelu, kSigmoid };

const char *ActivationName(Activation act);
Activation ParseActivation(const std::string &name);

// Element-wise and structural ops. Shapes must match exactly; there is no
// general broadcasting.
template <typename T> Tensor<T> Relu(const Tensor<T> &x);
template <typename T> Tensor<T> Sigmoid(const Tensor<T> &x);
template <typename T> Tensor<T> Activate(const Tensor<T> &x, Activation act);
template <typename T> Tensor<T> Add(const Tensor<T> &a, const Tensor<T> &b);
template <typename T> Tensor<T> Scale(const Tensor<T> &x, T factor);
// Sum / mean of all elements; result shape [1].
template <typename T> Tensor<T> Sum(const Tensor<T> &x);
template <typename T> Tensor<T> Mean(const Tensor<T> &x);
// Sum of x * weights for a constant weight vector; result shape [1].
template <typename T>
Tensor<T> WeightedSum(const Tensor<T> &x, const std::vector<T> &weights);
// Smaller of two scalars; ties select a. Gradient flows to the selection.
template <typename T> Tensor<T> Minimum(const Tensor<T> &a, const Tensor<T> &b);

template <typename T> Tensor<T> Reshape(const Tensor<T> &x, Shape shape);
// Concatenates along the last axis; leading axes must agree.
template <typename T>
Tensor<T> ConcatLast(const Tensor<T> &a, const Tensor<T> &b);
// [..., D1] and [D2] -> [..., D1 + D2]: the same vector appended to every row.
template <typename T>
Tensor<T> AppendToRows(const Tensor<T> &x, const Tensor<T> &v);
// Columns [begin, end) of the last axis.
template <typename T>
Tensor<T> SliceLast(const Tensor<T> &x, int64_t begin, int64_t end);
// [B, T, H] -> [B, H] at time index t.
template <typename T> Tensor<T> SelectStep(const Tensor<T> &x, int64_t t);

// x [..., Din] times weight [Din, Dout] plus bias [Dout].
template <typename T>
Tensor<T> Linear(const Tensor<T> &x, const Tensor<T> &weight,
                 const Tensor<T> &bias);
template <typename T>
Tensor<T> FullyConnected(const Tensor<T> &x, const Tensor<T> &weight,
                         const Tensor<T> &bias, Activation act);

// Rows of x [N, D] scaled to unit L2 norm. Zero rows are an error.
template <typename T> Tensor<T> L2NormalizeRows(const Tensor<T> &x);

// Each row of x [N, D] shifted to zero mean and scaled by
// 1 / sqrt(var + eps), with var the biased variance over the row. No affine
// terms.
template <typename T>
Tensor<T> StandardizeRows(const Tensor<T> &x, double eps = 1e-5);

// "Same" zero-padded dilated convolution, channels-last.
//   input [T, F, Cin], kernel [kt, kf, Cin, Cout], bias [Cout] -> [T, F, Cout]
//   out[t,f,o] = bias[o] + sum_{i,j,c} in[t + (i - kt/2) dt, f + (j - kf/2) df, c]
//                                      * K[i,j,c,o]
template <typename T>
Tensor<T> Conv2d(const Tensor<T> &input, const Tensor<T> &kernel,
                 const Tensor<T> &bias, int dilation_time, int dilation_freq);

// Single-direction LSTM over x [B, T, D] with zero initial state.
// Gate layout along the 4H axis: input, forget, cell candidate, output.
//   w_ih [D, 4H], w_hh [H, 4H], bias [4H] -> [B, T, H]
// With reverse = true the recurrence runs from t = T-1 down to 0 and the
// output at index t is the state after consuming frames t..T-1.
template <typename T>
Tensor<T> Lstm(const Tensor<T> &x, const Tensor<T> &w_ih,
               const Tensor<T> &w_hh, const Tensor<T> &bias,
               bool reverse = false);

template <typename T>
struct LstmWeights {
  Tensor<T> w_ih, w_hh, bias;
};

// Forward LSTM, or, when backward weights are given, the concatenation
// [forward | reversed-backward] per frame ([B, T, 2H]).
template <typename T>
Tensor<T> LstmLayer(const Tensor<T> &x, const LstmWeights<T> &forward,
                    const LstmWeights<T> *backward = nullptr);

}  // namespace vfkit::ad
