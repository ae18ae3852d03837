// src/dsp/features.cc

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

#include "tdsb/dsp/features.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdsb/util/error.h"

namespace tdsb {

FeatureMatrix IpdFeatures(const Spectrogram &spec) {
  if (spec.num_channels != 2)
    throw DataError("ipd features need exactly 2 channels, got " +
                    std::to_string(spec.num_channels));
  const int bins = spec.num_bins;
  FeatureMatrix out(spec.num_frames, 2 * bins);
  for (int t = 0; t < spec.num_frames; ++t)
    for (int f = 0; f < bins; ++f) {
      const std::complex<double> y1 = spec.at(0, t, f);
      const std::complex<double> y2 = spec.at(1, t, f);
      // angle(y1 / y2) == angle(y1 * conj(y2)) without the division.
      const double phi =
          std::abs(y2) < kIpdGuard ? 0.0 : std::arg(y1 * std::conj(y2));
      out(t, f) = std::cos(phi);
      out(t, bins + f) = std::sin(phi);
    }
  return out;
}

std::vector<int> UpsampleIndices(int source_frames, int target_frames) {
  if (source_frames < 1)
    throw DataError("upsample: input has no frames");
  if (target_frames < 1)
    throw DataError("upsample: target frame count must be positive");
  std::vector<int> idx(target_frames);
  for (int k = 0; k < target_frames; ++k)
    idx[k] = std::min(static_cast<int>(static_cast<int64_t>(k) * source_frames /
                                       target_frames),
                      source_frames - 1);
  return idx;
}

FeatureMatrix UpsampleFrames(const FeatureMatrix &feat, int target_frames) {
  const std::vector<int> idx = UpsampleIndices(feat.rows, target_frames);
  FeatureMatrix out(target_frames, feat.cols);
  for (int k = 0; k < target_frames; ++k)
    std::copy_n(feat.data.begin() + static_cast<size_t>(idx[k]) * feat.cols,
                feat.cols, out.data.begin() + static_cast<size_t>(k) * feat.cols);
  return out;
}

}  // namespace tdsb
