// tdsb/model/model_gradcheck.h

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

#ifndef TDSB_MODEL_MODEL_GRADCHECK_H_
#define TDSB_MODEL_MODEL_GRADCHECK_H_

#include <cstdint>
#include <vector>

#include "tdsb/autodiff/gradcheck.h"
#include "tdsb/model/topology.h"

namespace tdsb {

/// Central-difference steps used for whole-network checks.
inline constexpr double kModelGradSteps[] = {1e-5, 1e-6, 1e-7};

/// Finite-difference check of every parameter of a miniature network
/// (TopologyConfig::Miniature, 60-sample two-channel input, 3 training
/// speakers). Extraction models use the multitask loss with the given
/// alpha; the baseline uses the PIT loss and ignores alpha. One record per
/// parameter, named "<model>/<ipd mode>/a<alpha>/<parameter>".
std::vector<GradCheckRecord> RunModelGradientCheck(ModelKind kind,
                                                   IpdMode ipd_mode,
                                                   double alpha, uint64_t seed,
                                                   double tolerance = 1e-4);

/// The op suite (`op_trials` draws per op) followed by the whole-network
/// check of every supported model/IPD/alpha combination with alpha in
/// {0, 10}.
std::vector<GradCheckRecord> RunFullGradientSuite(uint64_t seed, int op_trials = 20,
                                                  double tolerance = 1e-4);

}  // namespace tdsb

#endif  // TDSB_MODEL_MODEL_GRADCHECK_H_
