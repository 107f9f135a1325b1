// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "autodiff/ops.h"

#include <cmath>

#include "autodiff/eigen_util.h"
#include "common/io.h"

namespace vfkit::ad {

const char *ActivationName(Activation act) {
  switch (act) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kNone: break;
  }
  return "none";
}

Activation ParseActivation(const std::string &name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "none") return Activation::kNone;
  ThrowFormat("unknown activation '" + name + "'");
}

namespace {

template <typename T>
bool Tracks(const Node<T> &self, size_t i) {
  return self.inputs.size() > i && self.inputs[i]->requires_grad;
}

void CheckSameShape(const Shape &a, const Shape &b, const char *op) {
  if (a != b)
    ThrowInvalid(std::string(op) + ": shape mismatch " + ShapeToString(a) +
                 " vs " + ShapeToString(b));
}

}  // namespace

template <typename T>
Tensor<T> Relu(const Tensor<T> &x) {
  Buffer<T> out(x.values().begin(), x.values().end());
  for (T &v : out) v = v > T(0) ? v : T(0);
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x}, [](Node<T> &self) {
    auto &in = *self.inputs[0];
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (self.value[i] > T(0)) in.grad[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> Sigmoid(const Tensor<T> &x) {
  Buffer<T> out(x.values().begin(), x.values().end());
  for (T &v : out) v = T(1) / (T(1) + std::exp(-v));
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x}, [](Node<T> &self) {
    auto &in = *self.inputs[0];
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const T s = self.value[i];
      in.grad[i] += self.grad[i] * s * (T(1) - s);
    }
  });
}

template <typename T>
Tensor<T> Activate(const Tensor<T> &x, Activation act) {
  switch (act) {
    case Activation::kRelu: return Relu(x);
    case Activation::kSigmoid: return Sigmoid(x);
    case Activation::kNone: break;
  }
  return x;
}

template <typename T>
Tensor<T> Add(const Tensor<T> &a, const Tensor<T> &b) {
  CheckSameShape(a.shape(), b.shape(), "Add");
  Buffer<T> out(a.values().begin(), a.values().end());
  for (size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
  return Tensor<T>::MakeResult(a.shape(), std::move(out), {a, b}, [](Node<T> &self) {
    for (size_t k = 0; k < 2; ++k) {
      if (!Tracks(self, k)) continue;
      auto &g = self.inputs[k]->grad;
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> Scale(const Tensor<T> &x, T factor) {
  Buffer<T> out(x.values().begin(), x.values().end());
  for (T &v : out) v *= factor;
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x},
                               [factor](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

template <typename T>
Tensor<T> Sum(const Tensor<T> &x) {
  T s = T(0);
  for (T v : x.values()) s += v;
  return Tensor<T>::MakeResult({1}, {s}, {x}, [](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (T &v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> Mean(const Tensor<T> &x) {
  if (x.numel() == 0) ThrowInvalid("Mean of empty tensor");
  return Scale(Sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> WeightedSum(const Tensor<T> &x, const std::vector<T> &weights) {
  if (static_cast<int64_t>(weights.size()) != x.numel())
    ThrowInvalid("WeightedSum: weight count mismatch");
  T s = T(0);
  for (size_t i = 0; i < weights.size(); ++i) s += x.values()[i] * weights[i];
  return Tensor<T>::MakeResult({1}, {s}, {x}, [weights](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (size_t i = 0; i < g.size(); ++i) g[i] += weights[i] * self.grad[0];
  });
}

template <typename T>
Tensor<T> Minimum(const Tensor<T> &a, const Tensor<T> &b) {
  if (a.numel() != 1 || b.numel() != 1) ThrowInvalid("Minimum expects scalars");
  const bool pick_a = !(b.item() < a.item());
  return Tensor<T>::MakeResult({1}, {pick_a ? a.item() : b.item()}, {a, b},
                               [pick_a](Node<T> &self) {
    const size_t k = pick_a ? 0 : 1;
    if (Tracks(self, k)) self.inputs[k]->grad[0] += self.grad[0];
  });
}

template <typename T>
Tensor<T> Reshape(const Tensor<T> &x, Shape shape) {
  if (NumElements(shape) != x.numel())
    ThrowInvalid("Reshape: " + ShapeToString(x.shape()) + " -> " +
                 ShapeToString(shape));
  Buffer<T> out(x.values().begin(), x.values().end());
  return Tensor<T>::MakeResult(std::move(shape), std::move(out), {x},
                               [](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> ConcatLast(const Tensor<T> &a, const Tensor<T> &b) {
  Shape lead_a(a.shape().begin(), a.shape().end() - 1);
  Shape lead_b(b.shape().begin(), b.shape().end() - 1);
  CheckSameShape(lead_a, lead_b, "ConcatLast");
  const int64_t da = a.dim(-1), db = b.dim(-1), rows = NumElements(lead_a);
  Shape shape = lead_a;
  shape.push_back(da + db);
  Buffer<T> out(rows * (da + db));
  for (int64_t r = 0; r < rows; ++r) {
    std::copy_n(a.values().data() + r * da, da, out.data() + r * (da + db));
    std::copy_n(b.values().data() + r * db, db, out.data() + r * (da + db) + da);
  }
  return Tensor<T>::MakeResult(std::move(shape), std::move(out), {a, b},
                               [rows, da, db](Node<T> &self) {
    for (int64_t r = 0; r < rows; ++r) {
      const T *g = self.grad.data() + r * (da + db);
      if (Tracks(self, 0))
        for (int64_t i = 0; i < da; ++i) self.inputs[0]->grad[r * da + i] += g[i];
      if (Tracks(self, 1))
        for (int64_t i = 0; i < db; ++i)
          self.inputs[1]->grad[r * db + i] += g[da + i];
    }
  });
}

template <typename T>
Tensor<T> AppendToRows(const Tensor<T> &x, const Tensor<T> &v) {
  if (v.rank() != 1) ThrowInvalid("AppendToRows: vector must be rank 1");
  const int64_t dx = x.dim(-1), dv = v.dim(0), rows = x.numel() / dx;
  Shape shape = x.shape();
  shape.back() = dx + dv;
  Buffer<T> out(rows * (dx + dv));
  for (int64_t r = 0; r < rows; ++r) {
    std::copy_n(x.values().data() + r * dx, dx, out.data() + r * (dx + dv));
    std::copy_n(v.values().data(), dv, out.data() + r * (dx + dv) + dx);
  }
  return Tensor<T>::MakeResult(std::move(shape), std::move(out), {x, v},
                               [rows, dx, dv](Node<T> &self) {
    for (int64_t r = 0; r < rows; ++r) {
      const T *g = self.grad.data() + r * (dx + dv);
      if (Tracks(self, 0))
        for (int64_t i = 0; i < dx; ++i) self.inputs[0]->grad[r * dx + i] += g[i];
      if (Tracks(self, 1))
        for (int64_t i = 0; i < dv; ++i) self.inputs[1]->grad[i] += g[dx + i];
    }
  });
}

template <typename T>
Tensor<T> SliceLast(const Tensor<T> &x, int64_t begin, int64_t end) {
  const int64_t d = x.dim(-1);
  if (begin < 0 || end > d || begin >= end)
    ThrowInvalid("SliceLast: bad range");
  const int64_t w = end - begin, rows = x.numel() / d;
  Shape shape = x.shape();
  shape.back() = w;
  Buffer<T> out(rows * w);
  for (int64_t r = 0; r < rows; ++r)
    std::copy_n(x.values().data() + r * d + begin, w, out.data() + r * w);
  return Tensor<T>::MakeResult(std::move(shape), std::move(out), {x},
                               [rows, d, w, begin](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t i = 0; i < w; ++i) g[r * d + begin + i] += self.grad[r * w + i];
  });
}

template <typename T>
Tensor<T> SelectStep(const Tensor<T> &x, int64_t t) {
  if (x.rank() != 3) ThrowInvalid("SelectStep expects [B, T, H]");
  const int64_t batch = x.dim(0), steps = x.dim(1), h = x.dim(2);
  if (t < 0 || t >= steps) ThrowInvalid("SelectStep: index out of range");
  Buffer<T> out(batch * h);
  for (int64_t b = 0; b < batch; ++b)
    std::copy_n(x.values().data() + (b * steps + t) * h, h, out.data() + b * h);
  return Tensor<T>::MakeResult({batch, h}, std::move(out), {x},
                               [batch, steps, h, t](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (int64_t b = 0; b < batch; ++b)
      for (int64_t i = 0; i < h; ++i)
        g[(b * steps + t) * h + i] += self.grad[b * h + i];
  });
}

template <typename T>
Tensor<T> Linear(const Tensor<T> &x, const Tensor<T> &weight,
                 const Tensor<T> &bias) {
  if (weight.rank() != 2 || bias.rank() != 1)
    ThrowInvalid("Linear: weight must be [Din, Dout] and bias [Dout]");
  const int64_t din = weight.dim(0), dout = weight.dim(1);
  if (x.dim(-1) != din || bias.dim(0) != dout)
    ThrowInvalid("Linear: shape mismatch " + ShapeToString(x.shape()) + " x " +
                 ShapeToString(weight.shape()));
  const int64_t rows = x.numel() / din;
  Shape shape = x.shape();
  shape.back() = dout;
  Buffer<T> out(rows * dout);
  MapMat<T> y(out.data(), rows, dout);
  y.noalias() = ConstMapMat<T>(x.values().data(), rows, din) *
                ConstMapMat<T>(weight.values().data(), din, dout);
  y.rowwise() += ConstMapVec<T>(bias.values().data(), dout).transpose();
  return Tensor<T>::MakeResult(std::move(shape), std::move(out), {x, weight, bias},
                               [rows, din, dout](Node<T> &self) {
    ConstMapMat<T> gy(self.grad.data(), rows, dout);
    if (Tracks(self, 0)) {
      MapMat<T>(self.inputs[0]->grad.data(), rows, din).noalias() +=
          gy * ConstMapMat<T>(self.inputs[1]->value.data(), din, dout).transpose();
    }
    if (Tracks(self, 1)) {
      MapMat<T>(self.inputs[1]->grad.data(), din, dout).noalias() +=
          ConstMapMat<T>(self.inputs[0]->value.data(), rows, din).transpose() * gy;
    }
    if (Tracks(self, 2)) {
      MapVec<T>(self.inputs[2]->grad.data(), dout) += gy.colwise().sum().transpose();
    }
  });
}

template <typename T>
Tensor<T> FullyConnected(const Tensor<T> &x, const Tensor<T> &weight,
                         const Tensor<T> &bias, Activation act) {
  return Activate(Linear(x, weight, bias), act);
}

template <typename T>
Tensor<T> L2NormalizeRows(const Tensor<T> &x) {
  if (x.rank() != 2) ThrowInvalid("L2NormalizeRows expects [N, D]");
  const int64_t n = x.dim(0), d = x.dim(1);
  Buffer<T> out(x.values().begin(), x.values().end());
  std::vector<T> norms(n);
  for (int64_t r = 0; r < n; ++r) {
    T s = T(0);
    for (int64_t i = 0; i < d; ++i) s += out[r * d + i] * out[r * d + i];
    norms[r] = std::sqrt(s);
    if (!(norms[r] > T(0))) ThrowInvalid("L2NormalizeRows: zero-norm row");
    for (int64_t i = 0; i < d; ++i) out[r * d + i] /= norms[r];
  }
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x},
                               [n, d, norms](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (int64_t r = 0; r < n; ++r) {
      const T *y = self.value.data() + r * d;
      const T *gy = self.grad.data() + r * d;
      T dot = T(0);
      for (int64_t i = 0; i < d; ++i) dot += y[i] * gy[i];
      for (int64_t i = 0; i < d; ++i)
        g[r * d + i] += (gy[i] - y[i] * dot) / norms[r];
    }
  });
}

template <typename T>
Tensor<T> StandardizeRows(const Tensor<T> &x, double eps) {
  if (x.rank() != 2) ThrowInvalid("StandardizeRows expects [N, D]");
  if (!(eps > 0.0)) ThrowInvalid("StandardizeRows: eps must be positive");
  const int64_t n = x.dim(0), d = x.dim(1);
  auto v = x.values();
  Buffer<T> out(v.size());
  std::vector<T> inv_std(n);
  for (int64_t r = 0; r < n; ++r) {
    const T *row = v.data() + r * d;
    double mean = 0.0;
    for (int64_t i = 0; i < d; ++i) mean += row[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t i = 0; i < d; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= static_cast<double>(d);
    inv_std[r] = static_cast<T>(1.0 / std::sqrt(var + eps));
    for (int64_t i = 0; i < d; ++i)
      out[r * d + i] = static_cast<T>((row[i] - mean) * inv_std[r]);
  }
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x},
                               [n, d, inv_std](Node<T> &self) {
    auto &g = self.inputs[0]->grad;
    for (int64_t r = 0; r < n; ++r) {
      const T *y = self.value.data() + r * d;
      const T *gy = self.grad.data() + r * d;
      double sum_g = 0.0, sum_gy = 0.0;
      for (int64_t i = 0; i < d; ++i) {
        sum_g += gy[i];
        sum_gy += static_cast<double>(gy[i]) * y[i];
      }
      const double mg = sum_g / d, mgy = sum_gy / d;
      for (int64_t i = 0; i < d; ++i)
        g[r * d + i] += static_cast<T>(inv_std[r] * (gy[i] - mg - y[i] * mgy));
    }
  });
}

#define VFKIT_INSTANTIATE_OPS(T)                                               \
  template Tensor<T> Relu(const Tensor<T> &);                                  \
  template Tensor<T> Sigmoid(const Tensor<T> &);                               \
  template Tensor<T> Activate(const Tensor<T> &, Activation);                  \
  template Tensor<T> Add(const Tensor<T> &, const Tensor<T> &);                \
  template Tensor<T> Scale(const Tensor<T> &, T);                              \
  template Tensor<T> Sum(const Tensor<T> &);                                   \
  template Tensor<T> Mean(const Tensor<T> &);                                  \
  template Tensor<T> WeightedSum(const Tensor<T> &, const std::vector<T> &);   \
  template Tensor<T> Minimum(const Tensor<T> &, const Tensor<T> &);            \
  template Tensor<T> Reshape(const Tensor<T> &, Shape);                        \
  template Tensor<T> ConcatLast(const Tensor<T> &, const Tensor<T> &);         \
  template Tensor<T> AppendToRows(const Tensor<T> &, const Tensor<T> &);       \
  template Tensor<T> SliceLast(const Tensor<T> &, int64_t, int64_t);           \
  template Tensor<T> StandardizeRows(const Tensor<T> &, double);               \
  template Tensor<T> SelectStep(const Tensor<T> &, int64_t);                   \
  template Tensor<T> Linear(const Tensor<T> &, const Tensor<T> &,              \
                            const Tensor<T> &);                                \
  template Tensor<T> FullyConnected(const Tensor<T> &, const Tensor<T> &,      \
                                    const Tensor<T> &, Activation);            \
  template Tensor<T> L2NormalizeRows(const Tensor<T> &);

VFKIT_INSTANTIATE_OPS(float)
VFKIT_INSTANTIATE_OPS(double)

}  // namespace vfkit::ad
