// tdsb/autodiff/gradcheck.h

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

#ifndef TDSB_AUTODIFF_GRADCHECK_H_
#define TDSB_AUTODIFF_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tdsb/autodiff/tensor.h"

namespace tdsb {

/// Relative error used by every gradient check:
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double GradRelativeError(double analytic, double numeric);

/// Max relative error between the tape gradient of scalar f at x and
/// central differences with step h. x itself is not modified.
double CheckGradient(const std::function<Tensor(const Tensor &)> &f,
                     const Tensor &x, double h = 1e-5);

/// Same, over several leaves at once. The leaves must require grad; their
/// values are perturbed in place and restored, and their grads are
/// overwritten with the analytic gradient.
double CheckGradients(const std::function<Tensor()> &f,
                      std::span<Tensor> leaves, double h = 1e-5);

/// Worst relative error per leaf. Each coordinate is scored against the
/// closest of the central differences taken at the given steps.
std::vector<double> CheckGradientsPerLeaf(const std::function<Tensor()> &f,
                                          std::span<Tensor> leaves,
                                          std::span<const double> steps);

struct GradCheckRecord {
  std::string name;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Randomized per-op finite-difference checks: for every op kind, `trials`
/// draws of small tensors (extents <= 6). Deterministic in `seed`.
std::vector<GradCheckRecord> RunOpGradientSuite(uint64_t seed, int trials,
                                                double tolerance = 1e-4);

}  // namespace tdsb

#endif  // TDSB_AUTODIFF_GRADCHECK_H_
