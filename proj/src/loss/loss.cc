// src/loss/loss.cc

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

#include "tdsb/loss/loss.h"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tdsb/autodiff/ops.h"
#include "tdsb/nn/layers.h"
#include "tdsb/util/error.h"

namespace tdsb {
namespace {

// Absolute floors that only matter for an estimate with no energy after
// mean removal; that case then reads 10 log10(eps), like an orthogonal one.
constexpr double kErrorFloor = 1e-200;
constexpr double kTargetFloor = kSiSnrEps * kErrorFloor;

void CheckLengths(int64_t a, int64_t b) {
  if (a != b)
    throw ShapeError("SiSNR length mismatch: reference has " +
                     std::to_string(a) + " samples, estimate has " +
                     std::to_string(b));
  if (a < 2) throw ShapeError("SiSNR needs at least two samples");
}

void CheckSignalShape(const Tensor &t) {
  if (t.rank() == 1 || (t.rank() == 2 && t.dim(0) == 1)) return;
  throw ShapeError("SiSNR expects [n] or [1, n] signals, got " +
                   ShapeString(t.shape()));
}

}  // namespace

Tensor SiSnr(const Tensor &reference, const Tensor &estimate) {
  CheckLengths(reference.size(), estimate.size());
  CheckSignalShape(reference);
  CheckSignalShape(estimate);
  const Tensor &x = reference, &y = estimate;
  if (x.shape() != y.shape())
    throw ShapeError("SiSNR shape mismatch: " + ShapeString(x.shape()) +
                     " vs " + ShapeString(y.shape()));
  Tensor xc = Sub(x, Mean(x));
  Tensor yc = Sub(y, Mean(y));
  Tensor xx = Dot(xc, xc);
  if (!(xx.item() > 0.0))
    throw DataError("SiSNR reference is silent (zero energy after mean removal)");
  Tensor s = Mul(xc, Mul(Dot(yc, xc), Pow(xx, -1.0)));
  Tensor e = Sub(yc, s);
  Tensor reg = Scale(Dot(yc, yc), kSiSnrEps);
  Tensor ratio = Sub(Log(AddScalar(Add(Dot(s, s), reg), kTargetFloor)),
                     Log(AddScalar(Add(Dot(e, e), reg), kErrorFloor)));
  return Scale(ratio, 10.0 / std::numbers::ln10);
}

double SiSnrDb(std::span<const double> reference,
               std::span<const double> estimate) {
  CheckLengths(static_cast<int64_t>(reference.size()),
               static_cast<int64_t>(estimate.size()));
  const size_t n = reference.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += reference[i];
    my += estimate[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double a = reference[i] - mx, b = estimate[i] - my;
    xx += a * a;
    xy += a * b;
    yy += b * b;
  }
  if (!(xx > 0.0))
    throw DataError("SiSNR reference is silent (zero energy after mean removal)");
  const double g = xy / xx;
  double ss = 0.0, ee = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double s = g * (reference[i] - mx);
    const double e = (estimate[i] - my) - s;
    ss += s * s;
    ee += e * e;
  }
  const double reg = kSiSnrEps * yy;
  return 10.0 * std::log10((ss + reg + kTargetFloor) / (ee + reg + kErrorFloor));
}

LossReport MultitaskLoss(const Tensor &reference, const Tensor &estimate,
                         const Tensor &embedding, const Tensor &projection,
                         int label, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw UsageError("multitask weight alpha must be finite and >= 0");
  Tensor sisnr = SiSnr(reference, estimate);
  Tensor ce = LinearSoftmaxCrossEntropy(embedding, projection, label);
  LossReport r;
  r.total = Add(Neg(sisnr), Scale(ce, alpha));
  r.sisnr_db = sisnr.item();
  r.cross_entropy = ce.item();
  r.alpha = alpha;
  return r;
}

LossReport PitLoss(const Tensor &ref1, const Tensor &ref2, const Tensor &est1,
                   const Tensor &est2) {
  Tensor a11 = SiSnr(ref1, est1), a22 = SiSnr(ref2, est2);
  Tensor a12 = SiSnr(ref1, est2), a21 = SiSnr(ref2, est1);
  const double identity = a11.item() + a22.item();
  const double swapped = a12.item() + a21.item();
  LossReport r;
  if (swapped > identity) {
    r.total = Scale(Add(a12, a21), -0.5);
    r.sisnr_db = 0.5 * swapped;
    r.permutation = {1, 0};
  } else {
    r.total = Scale(Add(a11, a22), -0.5);
    r.sisnr_db = 0.5 * identity;
  }
  return r;
}

}  // namespace tdsb
