// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vfkit::ad {

using Shape = std::vector<int64_t>;

// Tensor storage. A fixed base alignment keeps the vectorized kernels on the
// same code path for every allocation, so results do not depend on heap
// layout.
template <typename T>
using Buffer = std::vector<T, Eigen::aligned_allocator<T>>;

int64_t NumElements(const Shape &shape);
std::string ShapeToString(const Shape &shape);

template <typename T>
struct Node {
  Shape shape;
  Buffer<T> value;
  Buffer<T> grad;  // sized lazily, same length as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into the grads of inputs.
  std::function<void(Node &)> backward;

  bool is_leaf() const { return inputs.empty(); }
  void EnsureGrad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

// Reference-counted handle to a node of the computation graph. Copies share
// the node. Results of ops keep their inputs alive, so a graph lives as long
// as its outputs.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor FromValues(Shape shape, std::vector<T> values,
                           bool requires_grad = false);
  static Tensor Scalar(T value, bool requires_grad = false) {
    return FromValues({1}, {value}, requires_grad);
  }

  // Result of an op. The node tracks gradients iff any input does; the
  // backward closure is dropped otherwise.
  static Tensor MakeResult(Shape shape, Buffer<T> values,
                           std::vector<Tensor> inputs,
                           std::function<void(Node<T> &)> backward);

  bool defined() const { return node_ != nullptr; }
  const Shape &shape() const { return node_->shape; }
  int64_t dim(int i) const {
    return node_->shape[i < 0 ? node_->shape.size() + i : i];
  }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int64_t numel() const { return static_cast<int64_t>(node_->value.size()); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const T> values() const { return node_->value; }
  std::span<T> mutable_values() { return node_->value; }
  // Empty until a backward pass reached this tensor.
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() {
    node_->EnsureGrad();
    return node_->grad;
  }
  void ZeroGrad() { node_->grad.assign(node_->value.size(), T(0)); }
  T item() const;

  Node<T> *node() const { return node_.get(); }
  const std::shared_ptr<Node<T>> &shared_node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}
  std::shared_ptr<Node<T>> node_;
};

// While alive on a thread, ops on that thread record no graph (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

// Reverse pass from a scalar. Intermediate grads are reset first; leaf
// grads accumulate, so two calls without ZeroGrad() add up.
template <typename T>
void Backward(const Tensor<T> &loss);

}  // namespace vfkit::ad
