// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>

#include "autodiff/eigen_util.h"
#include "autodiff/ops.h"
#include "common/io.h"

namespace vfkit::ad {
namespace {

template <typename T>
T Sigm(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

template <typename T>
Tensor<T> Lstm(const Tensor<T> &x, const Tensor<T> &w_ih,
               const Tensor<T> &w_hh, const Tensor<T> &bias, bool reverse) {
  if (x.rank() != 3) ThrowInvalid("Lstm: input must be [B, T, D]");
  if (w_hh.rank() != 2 || w_ih.rank() != 2 || bias.rank() != 1)
    ThrowInvalid("Lstm: bad parameter ranks");
  const int64_t batch = x.dim(0), steps = x.dim(1), din = x.dim(2);
  const int64_t h = w_hh.dim(0), h4 = 4 * h;
  if (w_ih.dim(0) != din || w_ih.dim(1) != h4 || w_hh.dim(1) != h4 ||
      bias.dim(0) != h4)
    ThrowInvalid("Lstm: dimension mismatch input " + ShapeToString(x.shape()) +
                 " w_ih " + ShapeToString(w_ih.shape()) + " w_hh " +
                 ShapeToString(w_hh.shape()));

  const int64_t rows = batch * steps;
  RowMat<T> pre(rows, h4);
  pre.noalias() = ConstMapMat<T>(x.values().data(), rows, din) *
                  ConstMapMat<T>(w_ih.values().data(), din, h4);
  pre.rowwise() += ConstMapVec<T>(bias.values().data(), h4).transpose();
  ConstMapMat<T> whh(w_hh.values().data(), h, h4);

  // Per processing index k: activated gates [B, 4H], cell [B, H], tanh(cell).
  auto gates = std::make_shared<Buffer<T>>(steps * batch * h4);
  auto cells = std::make_shared<Buffer<T>>(steps * batch * h);
  auto tanh_cells = std::make_shared<Buffer<T>>(steps * batch * h);
  Buffer<T> out(batch * steps * h);

  RowMat<T> h_prev = RowMat<T>::Zero(batch, h);
  RowMat<T> c_prev = RowMat<T>::Zero(batch, h);
  RowMat<T> z(batch, h4);
  auto step_of = [steps, reverse](int64_t k) { return reverse ? steps - 1 - k : k; };
  for (int64_t k = 0; k < steps; ++k) {
    const int64_t s = step_of(k);
    for (int64_t b = 0; b < batch; ++b) z.row(b) = pre.row(b * steps + s);
    z.noalias() += h_prev * whh;
    MapMat<T> gk(gates->data() + k * batch * h4, batch, h4);
    MapMat<T> ck(cells->data() + k * batch * h, batch, h);
    MapMat<T> tk(tanh_cells->data() + k * batch * h, batch, h);
    for (int64_t b = 0; b < batch; ++b) {
      for (int64_t j = 0; j < h; ++j) {
        const T ig = Sigm(z(b, j));
        const T fg = Sigm(z(b, h + j));
        const T cg = std::tanh(z(b, 2 * h + j));
        const T og = Sigm(z(b, 3 * h + j));
        gk(b, j) = ig;
        gk(b, h + j) = fg;
        gk(b, 2 * h + j) = cg;
        gk(b, 3 * h + j) = og;
        const T c = fg * c_prev(b, j) + ig * cg;
        const T tc = std::tanh(c);
        ck(b, j) = c;
        tk(b, j) = tc;
        h_prev(b, j) = og * tc;
        out[(b * steps + s) * h + j] = og * tc;
      }
    }
    c_prev = ck;
  }

  return Tensor<T>::MakeResult(
      {batch, steps, h}, std::move(out), {x, w_ih, w_hh, bias},
      [=](Node<T> &self) {
        Node<T> &xn = *self.inputs[0];
        Node<T> &wih = *self.inputs[1];
        Node<T> &whhn = *self.inputs[2];
        Node<T> &bn = *self.inputs[3];
        ConstMapMat<T> whh_v(whhn.value.data(), h, h4);
        RowMat<T> dz_all(rows, h4);
        RowMat<T> dh_next = RowMat<T>::Zero(batch, h);
        RowMat<T> dc_next = RowMat<T>::Zero(batch, h);
        RowMat<T> dz(batch, h4);
        RowMat<T> h_before(batch, h);
        for (int64_t k = steps - 1; k >= 0; --k) {
          const int64_t s = step_of(k);
          const T *gk = gates->data() + k * batch * h4;
          const T *tk = tanh_cells->data() + k * batch * h;
          const T *cp = k > 0 ? cells->data() + (k - 1) * batch * h : nullptr;
          for (int64_t b = 0; b < batch; ++b) {
            for (int64_t j = 0; j < h; ++j) {
              const T ig = gk[b * h4 + j], fg = gk[b * h4 + h + j];
              const T cg = gk[b * h4 + 2 * h + j], og = gk[b * h4 + 3 * h + j];
              const T tc = tk[b * h + j];
              const T dh = self.grad[(b * steps + s) * h + j] + dh_next(b, j);
              const T dc = dh * og * (T(1) - tc * tc) + dc_next(b, j);
              const T c_before = cp ? cp[b * h + j] : T(0);
              dz(b, j) = dc * cg * ig * (T(1) - ig);
              dz(b, h + j) = dc * c_before * fg * (T(1) - fg);
              dz(b, 2 * h + j) = dc * ig * (T(1) - cg * cg);
              dz(b, 3 * h + j) = dh * tc * og * (T(1) - og);
              dc_next(b, j) = dc * fg;
            }
            dz_all.row(b * steps + s) = dz.row(b);
          }
          if (k > 0) {
            const int64_t sp = step_of(k - 1);
            for (int64_t b = 0; b < batch; ++b)
              for (int64_t j = 0; j < h; ++j)
                h_before(b, j) = self.value[(b * steps + sp) * h + j];
            if (whhn.requires_grad)
              MapMat<T>(whhn.grad.data(), h, h4).noalias() += h_before.transpose() * dz;
            dh_next.noalias() = dz * whh_v.transpose();
          }
        }
        if (bn.requires_grad)
          MapVec<T>(bn.grad.data(), h4) += dz_all.colwise().sum().transpose();
        if (wih.requires_grad)
          MapMat<T>(wih.grad.data(), din, h4).noalias() +=
              ConstMapMat<T>(xn.value.data(), rows, din).transpose() * dz_all;
        if (xn.requires_grad)
          MapMat<T>(xn.grad.data(), rows, din).noalias() +=
              dz_all * ConstMapMat<T>(wih.value.data(), din, h4).transpose();
      });
}

template <typename T>
Tensor<T> LstmLayer(const Tensor<T> &x, const LstmWeights<T> &forward,
                    const LstmWeights<T> *backward) {
  Tensor<T> fwd = Lstm(x, forward.w_ih, forward.w_hh, forward.bias, false);
  if (!backward) return fwd;
  Tensor<T> bwd = Lstm(x, backward->w_ih, backward->w_hh, backward->bias, true);
  return ConcatLast(fwd, bwd);
}

template Tensor<float> Lstm(const Tensor<float> &, const Tensor<float> &,
                            const Tensor<float> &, const Tensor<float> &, bool);
template Tensor<double> Lstm(const Tensor<double> &, const Tensor<double> &,
                             const Tensor<double> &, const Tensor<double> &, bool);
template Tensor<float> LstmLayer(const Tensor<float> &, const LstmWeights<float> &,
                                 const LstmWeights<float> *);
template Tensor<double> LstmLayer(const Tensor<double> &,
                                  const LstmWeights<double> &,
                                  const LstmWeights<double> *);

}  // namespace vfkit::ad
