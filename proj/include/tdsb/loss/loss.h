// tdsb/loss/loss.h

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

#ifndef TDSB_LOSS_LOSS_H_
#define TDSB_LOSS_LOSS_H_

#include <array>
#include <span>

#include "tdsb/autodiff/tensor.h"

namespace tdsb {

/// Relative regularizer of the scale-invariant SNR. Both the target and the
/// error energies are offset by kSiSnrEps times the estimate energy, which
/// keeps the measure exactly scale-invariant and bounds it to roughly
/// +/-80 dB (perfect and orthogonal estimates respectively).
inline constexpr double kSiSnrEps = 1e-8;

/// Scale-invariant SNR in dB between a reference x and an estimate x_hat
/// (same number of samples, any shapes with equal size). Both are made zero
/// mean; s = (<x_hat,x>/<x,x>) x, e = x_hat - s, and
///   SiSNR = 10 log10((|s|^2 + eps |x_hat|^2) / (|e|^2 + eps |x_hat|^2)).
/// Differentiable; result has shape {1}. Throws DataError for a silent
/// (constant) reference and ShapeError for a length mismatch.
Tensor SiSnr(const Tensor &reference, const Tensor &estimate);

/// The same quantity on plain sample buffers.
double SiSnrDb(std::span<const double> reference,
               std::span<const double> estimate);

struct LossReport {
  Tensor total;               // scalar to minimize
  double sisnr_db = 0.0;      // SiSNR term (mean over sources for PIT)
  double cross_entropy = 0.0; // 0 when not applicable
  double alpha = 0.0;
  std::array<int, 2> permutation = {0, 1};  // PIT: source k <- estimate p[k]
};

/// total = -SiSNR(reference, estimate) + alpha * CE(softmax(W e), label).
/// The cross-entropy term is always built so W receives a (possibly zero)
/// gradient. alpha must be >= 0.
LossReport MultitaskLoss(const Tensor &reference, const Tensor &estimate,
                         const Tensor &embedding, const Tensor &projection,
                         int label, double alpha);

/// Two-source permutation-invariant loss: the lower of
/// -(SiSNR(x1,e1)+SiSNR(x2,e2))/2 and -(SiSNR(x1,e2)+SiSNR(x2,e1))/2.
/// Ties keep the identity assignment.
LossReport PitLoss(const Tensor &ref1, const Tensor &ref2, const Tensor &est1,
                   const Tensor &est2);

}  // namespace tdsb

#endif  // TDSB_LOSS_LOSS_H_
