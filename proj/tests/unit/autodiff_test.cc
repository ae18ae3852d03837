// tests/unit/autodiff_test.cc

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

#include <cmath>
#include <random>

#include "doctest.h"
#include "tdsb/autodiff/gradcheck.h"
#include "tdsb/autodiff/ops.h"
#include "tdsb/util/error.h"

using namespace tdsb;

namespace {

Tensor Vec(std::vector<double> v, bool grad = false) {
  const int n = static_cast<int>(v.size());
  return Tensor::FromData({n}, std::move(v), grad);
}

std::vector<double> Values(const Tensor &t) {
  return {t.data().begin(), t.data().end()};
}

}  // namespace

TEST_CASE("elementwise mul") {
  Tensor y = Mul(Vec({1, 2, 3}), Vec({4, 5, 6}));
  CHECK(Values(y) == std::vector<double>{4, 10, 18});
}

TEST_CASE("conv1d is cross-correlation") {
  Tensor w = Tensor::FromData({1, 1, 2}, {1, 2});
  // Impulse at t=0: only the first tap ever sees it.
  Tensor y0 = Conv1d(Tensor::FromData({1, 4}, {1, 0, 0, 0}), w);
  CHECK(Values(y0) == std::vector<double>{1, 0, 0});
  // Impulse at t=1 reads the kernel back in reverse order.
  Tensor y1 = Conv1d(Tensor::FromData({1, 4}, {0, 1, 0, 0}), w);
  CHECK(Values(y1) == std::vector<double>{2, 1, 0});
}

TEST_CASE("conv1d geometry") {
  Tensor x = Tensor::Zeros({2, 10});
  Tensor w = Tensor::Zeros({4, 2, 3});
  CHECK(Conv1d(x, w, {.stride = 2}).shape() == Shape{4, 4});
  CHECK(Conv1d(x, w, {.dilation = 4, .padding = 4}).shape() == Shape{4, 10});
  Tensor dw = Tensor::Zeros({2, 1, 3});
  CHECK(Conv1d(x, dw, {.dilation = 2, .groups = 2, .padding = 2}).shape() ==
        Shape{2, 10});
  Tensor d = Tensor::FromData({1, 2}, {1, 1});
  CHECK(Conv1dTranspose(d, Tensor::Full({1, 1, 4}, 1.0), 2).shape() ==
        Shape{1, 6});
}

TEST_CASE("conv1d_transpose overlap-adds") {
  Tensor x = Tensor::FromData({1, 2}, {1, 2});
  Tensor w = Tensor::FromData({1, 1, 3}, {1, 1, 1});
  CHECK(Values(Conv1dTranspose(x, w, 2)) ==
        std::vector<double>{1, 1, 3, 2, 2});
}

TEST_CASE("softmax of equal logits is uniform") {
  Tensor y = Softmax(Vec({0, 0}), 0);
  CHECK(y.data()[0] == doctest::Approx(0.5));
  CHECK(y.data()[1] == doctest::Approx(0.5));
}

TEST_CASE("broadcast trailing singleton and leading batch") {
  Tensor h = Tensor::FromData({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor e = Tensor::FromData({2, 1}, {10, 100});
  CHECK(Values(Mul(h, e)) == std::vector<double>{10, 20, 30, 400, 500, 600});
  Tensor row = Tensor::FromData({3}, {1, 1, 1});
  CHECK(Values(Add(h, row)) == std::vector<double>{2, 3, 4, 5, 6, 7});
  CHECK(Values(Sub(row, h)) == std::vector<double>{0, -1, -2, -3, -4, -5});
}

TEST_CASE("shape errors name the op and both shapes") {
  try {
    Add(Tensor::Zeros({2, 3}), Tensor::Zeros({4}));
    FAIL("expected ShapeError");
  } catch (const ShapeError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("add") != std::string::npos);
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[4]") != std::string::npos);
  }
  CHECK_THROWS_AS(MatMul(Tensor::Zeros({2, 3}), Tensor::Zeros({2, 3})),
                  ShapeError);
  Tensor in[] = {Tensor::Zeros({2})};
  CHECK_THROWS_AS(Apply("fft", in), UsageError);
}

TEST_CASE("backward basics") {
  Tensor x = Vec({1, 2}, true);
  Backward(Sum(Mul(x, x)));
  CHECK(Values(Tensor::FromData({2}, {x.grad()[0], x.grad()[1]})) ==
        std::vector<double>{2, 4});

  Tensor m = Vec({1, 2, 3, 4}, true);
  Backward(Mean(m));
  for (double g : m.grad()) CHECK(g == 0.25);
}

TEST_CASE("backward rejects non-scalar loss and empty tape") {
  Tensor x = Vec({1, 2}, true);
  CHECK_THROWS_AS(Backward(Mul(x, x)), ShapeError);
  CHECK_THROWS_AS(Backward(Tensor::Scalar(1.0)), DataError);
}

TEST_CASE("gradients accumulate across backward calls") {
  Tensor x = Vec({3}, true);
  Backward(Sum(Mul(x, x)));
  Backward(Sum(Mul(x, x)));
  CHECK(x.grad()[0] == 12.0);
}

TEST_CASE("check_gradient examples") {
  auto sq = [](const Tensor &x) { return Sum(Mul(x, x)); };
  CHECK(CheckGradient(sq, Vec({1, 2, 3}), 1e-5) < 1e-7);

  auto constant = [](const Tensor &) { return Tensor::Scalar(3.0); };
  CHECK(CheckGradient(constant, Vec({1, 2, 3}), 1e-5) == 0.0);

  Tensor w = Tensor::FromData({2, 1, 3}, {0.3, -0.2, 0.5, 0.1, 0.4, -0.6});
  Tensor a = Tensor::FromData({1}, {0.25});
  Tensor r = Tensor::FromData({2, 6}, {1, -2, 3, 0.5, 1, 2, -1, 1, 2, -3, 1, 1});
  auto chain = [&](const Tensor &x) {
    Tensor h = PRelu(Conv1d(x, w, {.dilation = 1, .padding = 1}), a);
    return Sum(Mul(h, r));
  };
  Tensor x = Tensor::FromData({1, 6}, {0.5, -1.2, 0.8, 1.5, -0.7, 0.9});
  CHECK(CheckGradient(chain, x, 1e-5) < 1e-4);
}

TEST_CASE("per-op finite-difference suite, 100 draws per kind") {
  for (const auto &rec : RunOpGradientSuite(/*seed=*/1234, /*trials=*/100)) {
    INFO(rec.name << " max rel err " << rec.max_rel_error);
    CHECK(rec.passed);
  }
}

TEST_CASE("shared input receives the sum of both contributions") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  std::vector<double> v(5), wv(5);
  for (auto &x : v) x = n01(rng);
  for (auto &x : wv) x = n01(rng);
  Tensor w = Tensor::FromData({5}, wv);

  // f(x) = sum(exp(x)) + sum(x * w): x is consumed by two ops.
  Tensor x = Tensor::FromData({5}, v, true);
  Backward(Add(Sum(Exp(x)), Sum(Mul(x, w))));
  // Single-use rewrite of the same function: sum(exp(x) + x * w).
  Tensor x2 = Tensor::FromData({5}, v, true);
  Backward(Sum(Add(Exp(x2), Mul(x2, w))));
  for (int i = 0; i < 5; ++i) {
    CHECK(x.grad()[i] == doctest::Approx(x2.grad()[i]).epsilon(1e-14));
    CHECK(x.grad()[i] == doctest::Approx(std::exp(v[i]) + wv[i]).epsilon(1e-14));
  }
}

TEST_CASE("forward and backward are bitwise deterministic") {
  auto run = [] {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n01;
    std::vector<double> xv(3 * 40), wv(4 * 3 * 5);
    for (auto &x : xv) x = n01(rng);
    for (auto &x : wv) x = n01(rng);
    Tensor x = Tensor::FromData({3, 40}, xv, true);
    Tensor w = Tensor::FromData({4, 3, 5}, wv, true);
    Tensor g = Tensor::Full({4}, 1.0, true);
    Tensor b = Tensor::Zeros({4}, true);
    Tensor y = GlobalLayerNorm(Conv1d(x, w, {.stride = 2, .padding = 2}), g, b);
    Tensor loss = Sum(Log(AddScalar(Sigmoid(y), 1.0)));
    Backward(loss);
    std::vector<double> out{loss.item()};
    out.insert(out.end(), x.grad().begin(), x.grad().end());
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("no-grad mode records nothing") {
  Tensor x = Vec({1, 2}, true);
  NoGradGuard guard;
  Tensor y = Sum(Mul(x, x));
  CHECK_FALSE(y.requires_grad());
}
