// src/autodiff/gradcheck.cc

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

#include "tdsb/autodiff/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tdsb/autodiff/ops.h"
#include "tdsb/util/error.h"

namespace tdsb {

double GradRelativeError(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

std::vector<double> CheckGradientsPerLeaf(const std::function<Tensor()> &f,
                                          std::span<Tensor> leaves,
                                          std::span<const double> steps) {
  if (steps.empty()) throw UsageError("gradient check needs at least one step");
  for (double h : steps)
    if (!(h > 0.0)) throw UsageError("gradient check step must be positive");
  for (Tensor &t : leaves) {
    if (!t.requires_grad())
      throw UsageError("gradient check leaf does not require grad");
    t.ZeroGrad();
  }
  Tensor y = f();
  if (y.size() != 1)
    throw ShapeError("gradient check needs a scalar function, got " +
                     ShapeString(y.shape()));
  if (y.requires_grad()) Backward(y);

  std::vector<double> worst(leaves.size(), 0.0);
  NoGradGuard no_grad;
  for (size_t k = 0; k < leaves.size(); ++k) {
    Tensor &t = leaves[k];
    std::vector<double> analytic(t.size(), 0.0);
    if (t.has_grad())
      std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    auto data = t.mutable_data();
    for (int64_t i = 0; i < t.size(); ++i) {
      const double saved = data[i];
      double best = INFINITY;
      for (double h : steps) {
        data[i] = saved + h;
        const double up = f().item();
        data[i] = saved - h;
        const double down = f().item();
        data[i] = saved;
        best = std::min(best, GradRelativeError(analytic[i], (up - down) / (2.0 * h)));
        if (best == 0.0) break;
      }
      worst[k] = std::max(worst[k], best);
    }
  }
  return worst;
}

double CheckGradients(const std::function<Tensor()> &f,
                      std::span<Tensor> leaves, double h) {
  const double steps[] = {h};
  const auto per_leaf = CheckGradientsPerLeaf(f, leaves, steps);
  return per_leaf.empty() ? 0.0 : *std::max_element(per_leaf.begin(), per_leaf.end());
}

double CheckGradient(const std::function<Tensor(const Tensor &)> &f,
                     const Tensor &x, double h) {
  Tensor leaf = Tensor::FromData(x.shape(),
                                 std::vector<double>(x.data().begin(),
                                                     x.data().end()),
                                 /*requires_grad=*/true);
  Tensor leaves[] = {leaf};
  return CheckGradients([&] { return f(leaf); }, leaves, h);
}

namespace {

class OpFuzzer {
 public:
  explicit OpFuzzer(uint64_t seed) : rng_(seed) {}

  int Extent(int lo = 1, int hi = 6) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }

  Shape RandomShape(int min_rank = 1, int max_rank = 3) {
    Shape s(Extent(min_rank, max_rank));
    for (int &d : s) d = Extent();
    return s;
  }

  Tensor Leaf(const Shape &shape, double lo = -1.0, double hi = 1.0,
              double min_abs = 0.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(NumElements(shape));
    for (double &x : v) {
      do {
        x = u(rng_);
      } while (std::abs(x) < min_abs);
    }
    return Tensor::FromData(shape, std::move(v), true);
  }

  // Projection weights that turn any op output into a scalar without
  // degenerate symmetry (e.g. sum(softmax) == 1).
  Tensor Weights(const Shape &shape) {
    Tensor w = Leaf(shape);
    w.set_requires_grad(false);
    return w;
  }

  template <class T>
  T Pick(std::initializer_list<T> xs) {
    auto it = xs.begin();
    std::advance(it, std::uniform_int_distribution<int>(
                         0, static_cast<int>(xs.size()) - 1)(rng_));
    return *it;
  }

  std::mt19937_64 &rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

struct Case {
  std::vector<Tensor> leaves;
  std::vector<Tensor> inputs;  // leaves plus any constant inputs, in op order
  OpAttrs attrs;
};

Case MakeCase(std::string_view kind, OpFuzzer &fz) {
  Case c;
  auto leaf = [&](Tensor t) {
    c.leaves.push_back(t);
    c.inputs.push_back(t);
  };
  if (kind == "add" || kind == "sub" || kind == "mul") {
    Shape a = fz.RandomShape();
    Shape b = a;
    for (int &d : b)
      if (fz.Pick({false, true})) d = 1;
    if (b.size() > 1 && fz.Pick({false, true})) b.erase(b.begin());
    if (fz.Pick({false, true})) std::swap(a, b);
    leaf(fz.Leaf(a));
    leaf(fz.Leaf(b));
  } else if (kind == "matmul") {
    const int m = fz.Extent(), k = fz.Extent(), n = fz.Extent();
    leaf(fz.Leaf({m, k}));
    leaf(fz.Leaf({k, n}));
  } else if (kind == "conv1d") {
    OpAttrs &a = c.attrs;
    a.groups = fz.Pick({1, 1, 2, 3});
    const int cin = a.groups * fz.Extent(1, 2);
    const int cout = a.groups * fz.Extent(1, 2);
    const int k = fz.Extent(1, 4);
    a.stride = fz.Extent(1, 3);
    a.dilation = fz.Extent(1, 3);
    a.padding = fz.Extent(0, 2);
    const int span = a.dilation * (k - 1) + 1;
    const int t = std::max(span, 1) + fz.Extent(0, 5);
    leaf(fz.Leaf({cin, t}));
    leaf(fz.Leaf({cout, cin / a.groups, k}));
  } else if (kind == "conv1d_transpose") {
    c.attrs.stride = fz.Extent(1, 4);
    leaf(fz.Leaf({fz.Extent(1, 4), fz.Extent(1, 6)}));
    leaf(fz.Leaf({c.leaves[0].dim(0), fz.Extent(1, 3), fz.Extent(1, 5)}));
  } else if (kind == "prelu") {
    Shape s = fz.RandomShape();
    leaf(fz.Leaf(s, -1.0, 1.0, 0.05));
    leaf(fz.Leaf({fz.Pick({true, false}) ? 1 : s[0]}, 0.0, 0.5));
  } else if (kind == "relu") {
    leaf(fz.Leaf(fz.RandomShape(), -1.0, 1.0, 0.05));
  } else if (kind == "sigmoid" || kind == "exp") {
    leaf(fz.Leaf(fz.RandomShape(), -2.0, 2.0));
  } else if (kind == "log") {
    leaf(fz.Leaf(fz.RandomShape(), 0.5, 2.0));
  } else if (kind == "power") {
    leaf(fz.Leaf(fz.RandomShape(), 0.5, 2.0));
    c.attrs.exponent = fz.Pick({2.0, 3.0, 0.5, -1.0, 1.5});
  } else if (kind == "mean" || kind == "sum" || kind == "softmax" ||
             kind == "log_softmax") {
    Shape s = fz.RandomShape();
    leaf(fz.Leaf(s, -2.0, 2.0));
    const int rank = static_cast<int>(s.size());
    const bool reduce = kind == "mean" || kind == "sum";
    c.attrs.axis = std::uniform_int_distribution<int>(reduce ? -1 : 0,
                                                      rank - 1)(fz.rng());
  } else if (kind == "concat") {
    Shape s = fz.RandomShape();
    const int axis = std::uniform_int_distribution<int>(
        0, static_cast<int>(s.size()) - 1)(fz.rng());
    const int parts = fz.Extent(2, 3);
    for (int p = 0; p < parts; ++p) {
      Shape sp = s;
      sp[axis] = fz.Extent();
      leaf(fz.Leaf(sp));
    }
    c.attrs.axis = axis;
  } else if (kind == "slice") {
    Shape s = fz.RandomShape();
    const int axis = std::uniform_int_distribution<int>(
        0, static_cast<int>(s.size()) - 1)(fz.rng());
    const int b = std::uniform_int_distribution<int>(0, s[axis] - 1)(fz.rng());
    const int e = std::uniform_int_distribution<int>(b + 1, s[axis])(fz.rng());
    leaf(fz.Leaf(s));
    c.attrs.axis = axis;
    c.attrs.begin = b;
    c.attrs.end = e;
  } else if (kind == "index_select") {
    Shape s = fz.RandomShape();
    const int axis = std::uniform_int_distribution<int>(
        0, static_cast<int>(s.size()) - 1)(fz.rng());
    const int m = fz.Extent(1, 8);
    for (int i = 0; i < m; ++i)
      c.attrs.indices.push_back(
          std::uniform_int_distribution<int>(0, s[axis] - 1)(fz.rng()));
    leaf(fz.Leaf(s));
    c.attrs.axis = axis;
  } else if (kind == "layer_norm_global") {
    // Two elements normalize to +-1 whatever their values, leaving a
    // gradient that is pure eps noise; start at three.
    int ch, t;
    do {
      ch = fz.Extent(1, 6);
      t = fz.Extent(1, 6);
    } while (ch * t < 3);
    leaf(fz.Leaf({ch, t}, -2.0, 2.0));
    leaf(fz.Leaf({ch}, 0.5, 1.5));
    leaf(fz.Leaf({ch}));
  } else {
    throw UsageError("no gradient fuzzer for op kind '" + std::string(kind) +
                     "'");
  }
  return c;
}

}  // namespace

std::vector<GradCheckRecord> RunOpGradientSuite(uint64_t seed, int trials,
                                                double tolerance) {
  std::vector<GradCheckRecord> out;
  OpFuzzer fz(seed);
  for (std::string_view kind : OpKinds()) {
    GradCheckRecord rec;
    rec.name = "op/" + std::string(kind);
    for (int trial = 0; trial < trials; ++trial) {
      Case c = MakeCase(kind, fz);
      Tensor probe = Apply(kind, c.inputs, c.attrs);
      Tensor weights = fz.Weights(probe.shape());
      auto f = [&] { return Sum(Mul(Apply(kind, c.inputs, c.attrs), weights)); };
      rec.max_rel_error =
          std::max(rec.max_rel_error, CheckGradients(f, c.leaves, 1e-5));
    }
    rec.passed = rec.max_rel_error < tolerance;
    out.push_back(rec);
  }
  return out;
}

}  // namespace tdsb
