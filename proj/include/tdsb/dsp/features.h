// tdsb/dsp/features.h

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

#ifndef TDSB_DSP_FEATURES_H_
#define TDSB_DSP_FEATURES_H_

#include <vector>

#include "tdsb/dsp/stft.h"

namespace tdsb {

/// Row-major real matrix, rows = frames.
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(int r, int c) : rows(r), cols(c), data(size_t(r) * c, 0.0) {}
  double &operator()(int r, int c) { return data[size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return data[size_t(r) * cols + c]; }
};

/// Below this magnitude of the second channel's coefficient the phase
/// difference is taken as 0.
inline constexpr double kIpdGuard = 1e-12;

/// Inter-channel phase difference features of a 2-channel spectrogram:
/// row t = [cos(phi_t,0..F-1), sin(phi_t,0..F-1)], phi = angle(Y1 / Y2).
/// Throws DataError unless the spectrogram has exactly two channels.
FeatureMatrix IpdFeatures(const Spectrogram &spec);

/// Source frame for each of `target_frames` output frames:
/// min(floor(k * source_frames / target_frames), source_frames - 1).
std::vector<int> UpsampleIndices(int source_frames, int target_frames);

/// Nearest-neighbour frame-rate conversion of a [T_src x D] matrix.
FeatureMatrix UpsampleFrames(const FeatureMatrix &feat, int target_frames);

}  // namespace tdsb

#endif  // TDSB_DSP_FEATURES_H_
