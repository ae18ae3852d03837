// src/autodiff/tensor.cc

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

#include "tdsb/autodiff/tensor.h"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

#include "tdsb/util/error.h"

namespace tdsb {

namespace {

std::atomic<uint64_t> g_next_seq{1};
thread_local bool t_grad_enabled = true;

std::shared_ptr<internal::Node> NewNode(const Shape &shape,
                                        std::vector<double> data) {
  for (int d : shape) {
    if (d <= 0)
      throw ShapeError("tensor extents must be positive, got " +
                       ShapeString(shape));
  }
  if (static_cast<int64_t>(data.size()) != NumElements(shape))
    throw ShapeError("data length " + std::to_string(data.size()) +
                     " does not match shape " + ShapeString(shape));
  auto node = std::make_shared<internal::Node>();
  node->shape = shape;
  node->data = std::move(data);
  node->seq = g_next_seq.fetch_add(1, std::memory_order_relaxed);
  return node;
}

}  // namespace

int64_t NumElements(const Shape &shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::Zeros(const Shape &shape, bool requires_grad) {
  return Full(shape, 0.0, requires_grad);
}

Tensor Tensor::Full(const Shape &shape, double value, bool requires_grad) {
  auto node = NewNode(shape, std::vector<double>(NumElements(shape), value));
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::FromData(const Shape &shape, std::vector<double> data,
                        bool requires_grad) {
  auto node = NewNode(shape, std::move(data));
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Scalar(double value) { return FromData({1}, {value}); }

const Shape &Tensor::shape() const { return node_->shape; }

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank())
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     ShapeString(shape()));
  return node_->shape[axis];
}

int64_t Tensor::size() const {
  return static_cast<int64_t>(node_->data.size());
}

std::span<const double> Tensor::data() const { return node_->data; }
std::span<double> Tensor::mutable_data() { return node_->data; }

double Tensor::item() const {
  if (size() != 1)
    throw ShapeError("item() on non-scalar tensor " + ShapeString(shape()));
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { node_->requires_grad = flag; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
std::span<double> Tensor::mutable_grad() { return node_->EnsureGrad(); }

void Tensor::ZeroGrad() {
  if (!node_->grad.empty())
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

const char *Tensor::op_name() const { return node_->op; }

Tensor Tensor::Detach() const { return FromData(shape(), node_->data); }

void Backward(const Tensor &loss) {
  if (!loss.defined()) throw DataError("backward on undefined tensor");
  if (loss.size() != 1)
    throw ShapeError("backward needs a scalar loss, got shape " +
                     ShapeString(loss.shape()));
  if (!loss.requires_grad())
    throw DataError("backward: loss has no recorded operations on the tape");

  // Collect every node reachable through requires_grad edges.
  std::vector<internal::Node *> order;
  std::unordered_set<internal::Node *> seen;
  std::vector<internal::Node *> stack{loss.node().get()};
  seen.insert(stack.back());
  while (!stack.empty()) {
    internal::Node *n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (auto &in : n->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second)
        stack.push_back(in.get());
    }
  }
  // Reverse tape order: consumers before producers.
  std::sort(order.begin(), order.end(),
            [](const internal::Node *a, const internal::Node *b) {
              return a->seq > b->seq;
            });

  loss.node()->EnsureGrad()[0] += 1.0;
  for (internal::Node *n : order) {
    if (!n->backward) continue;
    n->EnsureGrad();
    n->backward(*n);
  }
  // Every reachable leaf gets a populated (possibly zero) gradient.
  for (internal::Node *n : order) n->EnsureGrad();
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) {
  t_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

bool GradModeEnabled() { return t_grad_enabled; }

namespace internal {

Tensor Record(const char *op, Shape shape, std::vector<double> data,
              std::vector<Tensor> inputs, BackwardFn backward) {
  auto node = NewNode(shape, std::move(data));
  node->op = op;
  if (!t_grad_enabled) return Tensor(std::move(node));
  bool any = false;
  for (const Tensor &t : inputs) any = any || t.requires_grad();
  if (!any) return Tensor(std::move(node));
  node->requires_grad = true;
  node->inputs.reserve(inputs.size());
  for (Tensor &t : inputs) node->inputs.push_back(t.node());
  node->backward = std::move(backward);
  return Tensor(std::move(node));
}

}  // namespace internal

}  // namespace tdsb
