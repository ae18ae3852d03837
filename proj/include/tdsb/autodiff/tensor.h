// tdsb/autodiff/tensor.h

// Copyright 2026  The tdspkbeam Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TDSB_AUTODIFF_TENSOR_H_
#define TDSB_AUTODIFF_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tdsb {

/// Tensor shape; every extent is positive. Scalars have shape {1}.
using Shape = std::vector<int>;

int64_t NumElements(const Shape &shape);
std::string ShapeString(const Shape &shape);

class Tensor;

namespace internal {

// One entry of the gradient tape. Nodes are ordered by `seq`, which grows
// monotonically with creation, so an op's inputs always precede it.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  uint64_t seq = 0;
  const char *op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Adds d(loss)/d(input) into every input that requires grad, reading
  // this node's grad. Must accumulate, never overwrite.
  std::function<void(Node &)> backward;

  std::vector<double> &EnsureGrad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

}  // namespace internal

/// Dense row-major float64 array taking part in reverse-mode
/// differentiation. Tensor is a cheap handle; copies share storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(const Shape &shape, bool requires_grad = false);
  static Tensor Full(const Shape &shape, double value,
                     bool requires_grad = false);
  static Tensor FromData(const Shape &shape, std::vector<double> data,
                         bool requires_grad = false);
  static Tensor Scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape &shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  int dim(int axis) const;
  int64_t size() const;

  std::span<const double> data() const;
  /// Direct write access. Only legitimate on leaves (parameters, inputs).
  std::span<double> mutable_data();
  double item() const;
  double at(int64_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void ZeroGrad();

  /// Name of the op that produced this tensor ("leaf" for leaves).
  const char *op_name() const;

  /// Same values, no history, fresh storage.
  Tensor Detach() const;

  const std::shared_ptr<internal::Node> &node() const { return node_; }
  explicit Tensor(std::shared_ptr<internal::Node> node)
      : node_(std::move(node)) {}

 private:
  std::shared_ptr<internal::Node> node_;
};

/// Runs the tape backwards from a scalar loss, accumulating into `grad` of
/// every reachable tensor that requires grad. Throws ShapeError for a
/// non-scalar loss and DataError when the loss carries no recorded history.
void Backward(const Tensor &loss);

/// While alive, ops on this thread record nothing (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

 private:
  bool previous_;
};

bool GradModeEnabled();

namespace internal {

using BackwardFn = std::function<void(Node &)>;

// Wraps a freshly computed value into a tape entry. History is kept only
// when grad mode is on and at least one input requires grad.
Tensor Record(const char *op, Shape shape, std::vector<double> data,
              std::vector<Tensor> inputs, BackwardFn backward);

}  // namespace internal

}  // namespace tdsb

#endif  // TDSB_AUTODIFF_TENSOR_H_
