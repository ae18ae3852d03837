// tests/unit/loss_test.cc

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
#include "tdsb/loss/loss.h"
#include "tdsb/util/error.h"

using namespace tdsb;

namespace {

std::vector<double> Noise(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double &x : v) x = d(rng);
  return v;
}

Tensor Row(const std::vector<double> &v, bool grad = false) {
  return Tensor::FromData({1, static_cast<int>(v.size())}, v, grad);
}

std::vector<double> Centered(std::vector<double> x) {
  double m = 0;
  for (double a : x) m += a;
  m /= static_cast<double>(x.size());
  for (double &a : x) a -= m;
  return x;
}

// Zero-mean component of `v` orthogonal to the zero-mean part of `ref`.
std::vector<double> Orthogonalize(std::vector<double> v,
                                  const std::vector<double> &ref) {
  const std::vector<double> r = Centered(ref);
  v = Centered(std::move(v));
  double rv = 0, rr = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    rv += r[i] * v[i];
    rr += r[i] * r[i];
  }
  for (size_t i = 0; i < v.size(); ++i) v[i] -= rv / rr * r[i];
  return v;
}

double Energy(const std::vector<double> &v) {
  double e = 0;
  for (double a : v) e += a * a;
  return e;
}

}  // namespace

TEST_CASE("perfect estimate reaches the ~80 dB cap") {
  auto x = Noise(400, 1);
  const double v = SiSnrDb(x, x);
  CHECK(v == doctest::Approx(80.0).epsilon(1e-6));
  CHECK(SiSnr(Row(x), Row(x)).item() == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("orthogonal estimate sits at the ~-80 dB floor") {
  std::vector<double> x = {1, 0, -1, 0}, y = {0, 1, 0, -1};
  CHECK(SiSnrDb(x, y) == doctest::Approx(-80.0).epsilon(1e-6));
  // Two samples: every estimate orthogonal to the centred reference is
  // constant, so it has no energy after centring and reads as the floor.
  CHECK(SiSnrDb(std::vector<double>{1, 0}, std::vector<double>{3, 3}) ==
        doctest::Approx(-80.0).epsilon(1e-6));
  CHECK(SiSnr(Row({1, 0}), Row({3, 3})).item() ==
        doctest::Approx(-80.0).epsilon(1e-6));
}

TEST_CASE("orthogonal noise of equal power gives 0 dB") {
  auto x = Noise(512, 2);
  auto n = Orthogonalize(Noise(512, 3), x);
  const double scale = std::sqrt(Energy(Centered(x)) / Energy(n));
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] + scale * n[i];
  CHECK(std::abs(SiSnrDb(x, y)) < 1e-9);
}

TEST_CASE("scale invariance in estimate and reference") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> logu(std::log(1e-3), std::log(1e3));
  for (int trial = 0; trial < 50; ++trial) {
    auto x = Noise(300, 10 + trial);
    auto y = Noise(300, 100 + trial);
    for (size_t i = 0; i < y.size(); ++i) y[i] = 0.7 * x[i] + 0.5 * y[i];
    const double base = SiSnrDb(x, y);
    const double lambda = std::exp(logu(rng));
    std::vector<double> ys = y, xs = x;
    for (double &v : ys) v *= lambda;
    for (double &v : xs) v *= lambda;
    CHECK(std::abs(SiSnrDb(x, ys) - base) < 1e-9);
    CHECK(std::abs(SiSnrDb(xs, y) - base) < 1e-9);
    CHECK(std::abs(SiSnr(Row(x), Row(ys)).item() - base) < 1e-9);
  }
}

TEST_CASE("tensor and plain SiSNR agree") {
  for (int trial = 0; trial < 20; ++trial) {
    auto x = Noise(257, 200 + trial), y = Noise(257, 300 + trial);
    for (size_t i = 0; i < y.size(); ++i) y[i] += trial * 0.3 * x[i];
    CHECK(std::abs(SiSnr(Row(x), Row(y)).item() - SiSnrDb(x, y)) < 1e-10);
  }
}

TEST_CASE("SiSNR errors") {
  CHECK_THROWS_AS(SiSnrDb(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}),
                  ShapeError);
  CHECK_THROWS_AS(SiSnrDb(std::vector<double>{0, 0, 0}, std::vector<double>{1, 2, 3}),
                  DataError);
  CHECK_THROWS_AS(SiSnrDb(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}),
                  DataError);
  CHECK_THROWS_AS(SiSnr(Row({1, 2, 3}), Row({1, 2})), ShapeError);
}

TEST_CASE("SiSNR gradient matches finite differences") {
  auto x = Noise(40, 5), y = Noise(40, 6);
  for (size_t i = 0; i < y.size(); ++i) y[i] += 0.8 * x[i];
  Tensor tx = Row(x, true), ty = Row(y, true);
  Tensor leaves[] = {tx, ty};
  CHECK(CheckGradients([&] { return SiSnr(tx, ty); }, leaves) < 1e-4);
}

TEST_CASE("multitask loss combination") {
  auto x = Noise(200, 7), y = Noise(200, 8);
  for (size_t i = 0; i < y.size(); ++i) y[i] += 2.0 * x[i];
  Tensor e = Tensor::FromData({3, 1}, {0.1, -0.2, 0.3}, true);
  Tensor w = Tensor::FromData({4, 3}, std::vector<double>(12, 0.0), true);

  LossReport r0 = MultitaskLoss(Row(x), Row(y), e, w, 1, 0.0);
  CHECK(r0.total.item() == -r0.sisnr_db);
  CHECK(r0.cross_entropy == doctest::Approx(std::log(4.0)));

  LossReport r10 = MultitaskLoss(Row(x), Row(y), e, w, 1, 10.0);
  CHECK(std::abs(r10.total.item() - (-r10.sisnr_db + 10.0 * r10.cross_entropy)) <
        1e-12);
  CHECK_THROWS_AS(MultitaskLoss(Row(x), Row(y), e, w, 1, -1.0), UsageError);
}

TEST_CASE("multitask loss arithmetic example") {
  // Orthogonal noise at -5 dB relative to the target gives SiSNR = 5 dB;
  // a zero projection over 4 speakers gives CE = ln 4.
  auto x = Noise(1024, 9);
  auto n = Orthogonalize(Noise(1024, 10), x);
  const double scale = std::sqrt(Energy(Centered(x)) / Energy(n) / std::pow(10.0, 0.5));
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] + scale * n[i];
  Tensor e = Tensor::FromData({2, 1}, {0.5, 1.5});
  Tensor w = Tensor::Zeros({4, 2});
  LossReport r = MultitaskLoss(Row(x), Row(y), e, w, 0, 10.0);
  CHECK(r.sisnr_db == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(r.total.item() == doctest::Approx(-5.0 + 10.0 * std::log(4.0)).epsilon(1e-6));
  CHECK(r.total.item() == doctest::Approx(8.863).epsilon(1e-4));
}

TEST_CASE("multitask loss reaches extraction and auxiliary parameters") {
  // Estimate = a * x + b * noise, embedding = c * ones: grads must reach
  // a, b (extraction side), c (auxiliary side) and W.
  auto x = Noise(64, 11), n = Noise(64, 12);
  Tensor a = Tensor::FromData({1}, {0.9}, true);
  Tensor b = Tensor::FromData({1}, {0.4}, true);
  Tensor c = Tensor::FromData({1}, {0.3}, true);
  Tensor w = Tensor::FromData({3, 2}, {0.1, 0.2, -0.3, 0.4, 0.5, -0.6}, true);
  Tensor est = Add(Mul(Row(x), a), Mul(Row(n), b));
  Tensor e = Mul(Tensor::FromData({2, 1}, {1.0, -2.0}), c);
  LossReport r = MultitaskLoss(Row(x), est, e, w, 2, 10.0);
  Backward(r.total);
  CHECK(b.grad()[0] != 0.0);
  CHECK(c.grad()[0] != 0.0);
  bool w_nonzero = false;
  for (double g : w.grad()) w_nonzero |= g != 0.0;
  CHECK(w_nonzero);
}

TEST_CASE("alpha zero leaves W with a zero gradient") {
  auto x = Noise(32, 13), y = Noise(32, 14);
  Tensor w = Tensor::FromData({2, 2}, {0.1, 0.2, 0.3, 0.4}, true);
  Tensor e = Tensor::FromData({2, 1}, {1.0, 2.0});
  LossReport r = MultitaskLoss(Row(x), Row(y, true), e, w, 0, 0.0);
  Backward(r.total);
  REQUIRE(w.has_grad());
  for (double g : w.grad()) CHECK(g == 0.0);
}

TEST_CASE("PIT picks the matching permutation") {
  auto x1 = Noise(100, 15), x2 = Noise(100, 16);
  LossReport id = PitLoss(Row(x1), Row(x2), Row(x1), Row(x2));
  CHECK(id.permutation == std::array<int, 2>{0, 1});
  CHECK(id.total.item() == doctest::Approx(-80.0).epsilon(1e-6));
  LossReport sw = PitLoss(Row(x1), Row(x2), Row(x2), Row(x1));
  CHECK(sw.permutation == std::array<int, 2>{1, 0});
  CHECK(sw.total.item() == doctest::Approx(-80.0).epsilon(1e-6));
}

TEST_CASE("PIT equals the exhaustive minimum and is swap invariant") {
  for (int trial = 0; trial < 30; ++trial) {
    auto x1 = Noise(80, 400 + trial), x2 = Noise(80, 500 + trial);
    auto e1 = Noise(80, 600 + trial), e2 = Noise(80, 700 + trial);
    for (size_t i = 0; i < e1.size(); ++i) {
      e1[i] += (trial % 3) * x1[i] + (trial % 2) * x2[i];
      e2[i] += (trial % 4) * x2[i];
    }
    const std::vector<double> *refs[] = {&x1, &x2};
    const std::vector<double> *ests[] = {&e1, &e2};
    const int perms[2][2] = {{0, 1}, {1, 0}};
    double best = INFINITY;
    for (const auto &p : perms) {
      double l = -(SiSnr(Row(*refs[0]), Row(*ests[p[0]])).item() +
                   SiSnr(Row(*refs[1]), Row(*ests[p[1]])).item()) /
                 2.0;
      best = std::min(best, l);
    }
    LossReport r = PitLoss(Row(x1), Row(x2), Row(e1), Row(e2));
    CHECK(std::abs(r.total.item() - best) < 1e-12);
    LossReport s = PitLoss(Row(x2), Row(x1), Row(e2), Row(e1));
    CHECK(s.total.item() == r.total.item());
    CHECK(s.permutation == r.permutation);
  }
}
