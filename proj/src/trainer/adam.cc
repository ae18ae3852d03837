// src/trainer/adam.cc

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

#include "tdsb/trainer/adam.h"

#include <cmath>

namespace tdsb {

Adam::Adam(ParamSet &params) : params_(params) {
  for (const auto &[name, t] : params_.items()) {
    m_.emplace_back(t.data().size(), 0.0);
    v_.emplace_back(t.data().size(), 0.0);
  }
}

void Adam::Step(double lr) {
  ++step_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  auto &items = params_.items();
  for (size_t i = 0; i < items.size(); ++i) {
    Tensor &p = items[i].second;
    std::span<double> w = p.mutable_data();
    const bool has_grad = p.has_grad();
    std::span<const double> g = has_grad ? p.grad() : std::span<const double>();
    std::vector<double> &m = m_[i];
    std::vector<double> &v = v_[i];
    for (size_t k = 0; k < w.size(); ++k) {
      const double gk = has_grad ? g[k] : 0.0;
      m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * gk;
      v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * gk * gk;
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + kEpsilon);
    }
  }
}

void ScaleGradients(ParamSet &params, double factor) {
  for (auto &[name, t] : params.items()) {
    if (!t.has_grad()) continue;
    for (double &g : t.mutable_grad()) g *= factor;
  }
}

double GlobalGradNorm(const ParamSet &params) {
  double sq = 0.0;
  for (const auto &[name, t] : params.items()) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double ClipGradNorm(ParamSet &params, double max_norm) {
  const double norm = GlobalGradNorm(params);
  if (max_norm > 0.0 && norm > max_norm) ScaleGradients(params, max_norm / norm);
  return norm;
}

}  // namespace tdsb
