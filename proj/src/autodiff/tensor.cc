// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "autodiff/tensor.h"

#include <unordered_set>

#include "common/io.h"

namespace vfkit::ad {

int64_t NumElements(const Shape &shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) ThrowInvalid("negative dimension in shape " + ShapeToString(shape));
    n *= d;
  }
  return n;
}

std::string ShapeToString(const Shape &shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {
thread_local bool g_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool GradEnabled() { return g_grad_enabled; }

template <typename T>
Tensor<T> Tensor<T>::Zeros(Shape shape, bool requires_grad) {
  const int64_t n = NumElements(shape);
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value.assign(n, T(0));
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::FromValues(Shape shape, std::vector<T> values,
                                bool requires_grad) {
  if (NumElements(shape) != static_cast<int64_t>(values.size()))
    ThrowInvalid("value count " + std::to_string(values.size()) +
                 " does not match shape " + ShapeToString(shape));
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value.assign(values.begin(), values.end());
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::MakeResult(Shape shape, Buffer<T> values,
                                std::vector<Tensor> inputs,
                                std::function<void(Node<T> &)> backward) {
  if (NumElements(shape) != static_cast<int64_t>(values.size()))
    ThrowInvalid("op produced " + std::to_string(values.size()) +
                 " values for shape " + ShapeToString(shape));
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  Tensor out(std::move(node));
  bool track = false;
  if (g_grad_enabled)
    for (const Tensor &in : inputs) track = track || in.requires_grad();
  if (track) {
    out.node_->requires_grad = true;
    out.node_->backward = std::move(backward);
    out.node_->inputs.reserve(inputs.size());
    for (Tensor &in : inputs) out.node_->inputs.push_back(in.node_);
  }
  return out;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1)
    ThrowInvalid("item() on tensor of shape " + ShapeToString(shape()));
  return node_->value[0];
}

template <typename T>
void Backward(const Tensor<T> &loss) {
  if (!loss.defined() || loss.numel() != 1)
    ThrowInvalid("backward requires a scalar loss");
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node<T> *> order;
  std::unordered_set<Node<T> *> seen;
  std::vector<std::pair<Node<T> *, size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T> *child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second)
        stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node<T> *node : order) {
    if (node->is_leaf())
      node->EnsureGrad();
    else
      node->grad.assign(node->value.size(), T(0));
  }
  loss.node()->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T> *node = *it;
    if (node->backward) {
      for (auto &in : node->inputs)
        if (in->requires_grad) in->EnsureGrad();
      node->backward(*node);
    }
  }
}

template class Tensor<float>;
template class Tensor<double>;
template void Backward(const Tensor<float> &);
template void Backward(const Tensor<double> &);

}  // namespace vfkit::ad
