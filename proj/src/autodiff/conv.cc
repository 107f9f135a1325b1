// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>

#include "autodiff/eigen_util.h"
#include "autodiff/ops.h"
#include "common/io.h"

namespace vfkit::ad {
namespace {

struct ConvGeometry {
  int64_t frames, bins, in_ch, out_ch;
  int64_t kt, kf, dt, df;

  int64_t rows() const { return frames * bins; }
  int64_t patch() const { return kt * kf * in_ch; }
  bool pointwise() const { return kt == 1 && kf == 1; }
};

// Column-matrix rows are processed in blocks of about this many values so
// the block stays cache resident.
constexpr int64_t kBlockValues = 1 << 18;

int64_t BlockRows(const ConvGeometry &g) {
  return std::max<int64_t>(32, kBlockValues / g.patch());
}

// Row r = t * bins + f of the column matrix holds the receptive field of
// output (t, f), tap-major then channel, matching the [kt, kf, Cin, Cout]
// kernel layout. Only rows [r0, r1) are written, starting at col.
template <typename T>
void Im2Col(const ConvGeometry &g, const T *in, int64_t r0, int64_t r1, T *col) {
  const int64_t c = g.in_ch, patch = g.patch();
  for (int64_t r = r0; r < r1; ++r) {
    const int64_t t = r / g.bins, f = r % g.bins;
    T *row = col + (r - r0) * patch;
    for (int64_t i = 0; i < g.kt; ++i) {
      const int64_t ts = t + (i - g.kt / 2) * g.dt;
      for (int64_t j = 0; j < g.kf; ++j) {
        T *dst = row + (i * g.kf + j) * c;
        const int64_t fs = f + (j - g.kf / 2) * g.df;
        if (ts < 0 || ts >= g.frames || fs < 0 || fs >= g.bins)
          std::fill_n(dst, c, T(0));
        else
          std::copy_n(in + (ts * g.bins + fs) * c, c, dst);
      }
    }
  }
}

template <typename T>
void Col2ImAdd(const ConvGeometry &g, const T *col, int64_t r0, int64_t r1,
               T *in_grad) {
  const int64_t c = g.in_ch, patch = g.patch();
  for (int64_t r = r0; r < r1; ++r) {
    const int64_t t = r / g.bins, f = r % g.bins;
    const T *row = col + (r - r0) * patch;
    for (int64_t i = 0; i < g.kt; ++i) {
      const int64_t ts = t + (i - g.kt / 2) * g.dt;
      if (ts < 0 || ts >= g.frames) continue;
      for (int64_t j = 0; j < g.kf; ++j) {
        const int64_t fs = f + (j - g.kf / 2) * g.df;
        if (fs < 0 || fs >= g.bins) continue;
        const T *src = row + (i * g.kf + j) * c;
        T *dst = in_grad + (ts * g.bins + fs) * c;
        for (int64_t k = 0; k < c; ++k) dst[k] += src[k];
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> Conv2d(const Tensor<T> &input, const Tensor<T> &kernel,
                 const Tensor<T> &bias, int dilation_time, int dilation_freq) {
  if (input.rank() != 3 || kernel.rank() != 4 || bias.rank() != 1)
    ThrowInvalid("Conv2d: expected input [T,F,C], kernel [kt,kf,Cin,Cout], bias [Cout]");
  if (kernel.dim(2) != input.dim(2) || bias.dim(0) != kernel.dim(3))
    ThrowInvalid("Conv2d: shape mismatch input " + ShapeToString(input.shape()) +
                 " kernel " + ShapeToString(kernel.shape()));
  if (dilation_time < 1 || dilation_freq < 1)
    ThrowInvalid("Conv2d: dilation must be >= 1");
  const ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), kernel.dim(3),
                       kernel.dim(0), kernel.dim(1), dilation_time, dilation_freq};

  Buffer<T> out(g.rows() * g.out_ch);
  MapMat<T> y(out.data(), g.rows(), g.out_ch);
  ConstMapMat<T> w(kernel.values().data(), g.patch(), g.out_ch);
  if (g.pointwise()) {
    y.noalias() = ConstMapMat<T>(input.values().data(), g.rows(), g.in_ch) * w;
  } else {
    const int64_t block = BlockRows(g);
    Buffer<T> col(block * g.patch());
    for (int64_t r0 = 0; r0 < g.rows(); r0 += block) {
      const int64_t n = std::min(block, g.rows() - r0);
      Im2Col(g, input.values().data(), r0, r0 + n, col.data());
      y.middleRows(r0, n).noalias() = ConstMapMat<T>(col.data(), n, g.patch()) * w;
    }
  }
  y.rowwise() += ConstMapVec<T>(bias.values().data(), g.out_ch).transpose();

  return Tensor<T>::MakeResult(
      {g.frames, g.bins, g.out_ch}, std::move(out), {input, kernel, bias},
      [g](Node<T> &self) {
        Node<T> &in = *self.inputs[0];
        Node<T> &ker = *self.inputs[1];
        Node<T> &b = *self.inputs[2];
        ConstMapMat<T> gy(self.grad.data(), g.rows(), g.out_ch);
        if (b.requires_grad)
          MapVec<T>(b.grad.data(), g.out_ch) += gy.colwise().sum().transpose();
        if (!ker.requires_grad && !in.requires_grad) return;
        ConstMapMat<T> w(ker.value.data(), g.patch(), g.out_ch);
        if (g.pointwise()) {
          if (ker.requires_grad)
            MapMat<T>(ker.grad.data(), g.patch(), g.out_ch).noalias() +=
                ConstMapMat<T>(in.value.data(), g.rows(), g.in_ch).transpose() * gy;
          if (in.requires_grad)
            MapMat<T>(in.grad.data(), g.rows(), g.in_ch).noalias() += gy * w.transpose();
          return;
        }
        const int64_t block = BlockRows(g);
        Buffer<T> col(block * g.patch());
        for (int64_t r0 = 0; r0 < g.rows(); r0 += block) {
          const int64_t n = std::min(block, g.rows() - r0);
          if (ker.requires_grad) {
            Im2Col(g, in.value.data(), r0, r0 + n, col.data());
            MapMat<T>(ker.grad.data(), g.patch(), g.out_ch).noalias() +=
                ConstMapMat<T>(col.data(), n, g.patch()).transpose() * gy.middleRows(r0, n);
          }
          if (in.requires_grad) {
            MapMat<T>(col.data(), n, g.patch()).noalias() =
                gy.middleRows(r0, n) * w.transpose();
            Col2ImAdd(g, col.data(), r0, r0 + n, in.grad.data());
          }
        }
      });
}

template Tensor<float> Conv2d(const Tensor<float> &, const Tensor<float> &,
                              const Tensor<float> &, int, int);
template Tensor<double> Conv2d(const Tensor<double> &, const Tensor<double> &,
                               const Tensor<double> &, int, int);

}  // namespace vfkit::ad
