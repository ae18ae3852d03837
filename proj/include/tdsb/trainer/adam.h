// tdsb/trainer/adam.h

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

#ifndef TDSB_TRAINER_ADAM_H_
#define TDSB_TRAINER_ADAM_H_

#include <cstdint>
#include <vector>

#include "tdsb/nn/layers.h"

namespace tdsb {

/// Adam over a fixed ParamSet, with bias-corrected moments. Parameters
/// that received no gradient are treated as having a zero gradient.
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit Adam(ParamSet &params);

  void Step(double lr);
  int64_t step_count() const { return step_; }
  void set_step_count(int64_t s) { step_ = s; }

  /// First and second moments, one vector per parameter in ParamSet order.
  std::vector<std::vector<double>> &first_moments() { return m_; }
  std::vector<std::vector<double>> &second_moments() { return v_; }

 private:
  ParamSet &params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  int64_t step_ = 0;
};

/// Multiplies every accumulated gradient by `factor`.
void ScaleGradients(ParamSet &params, double factor);
/// L2 norm over all accumulated gradients.
double GlobalGradNorm(const ParamSet &params);
/// Rescales gradients so their global norm is at most `max_norm`
/// (no-op when max_norm <= 0). Returns the norm before clipping.
double ClipGradNorm(ParamSet &params, double max_norm);

}  // namespace tdsb

#endif  // TDSB_TRAINER_ADAM_H_
