// tdsb/dsp/stft.h

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

#ifndef TDSB_DSP_STFT_H_
#define TDSB_DSP_STFT_H_

#include <complex>
#include <vector>

#include "tdsb/dsp/audio.h"

namespace tdsb {

/// Complex STFT coefficients indexed [channel][frame][bin], stored flat.
struct Spectrogram {
  int num_channels = 0;
  int num_frames = 0;
  int num_bins = 0;  // frame_len / 2 + 1
  int frame_len = 0;
  int hop = 0;
  std::vector<std::complex<double>> coef;

  std::complex<double> &at(int c, int t, int f) {
    return coef[(static_cast<size_t>(c) * num_frames + t) * num_bins + f];
  }
  const std::complex<double> &at(int c, int t, int f) const {
    return coef[(static_cast<size_t>(c) * num_frames + t) * num_bins + f];
  }
};

/// Number of full frames: 1 + (len - frame_len) / hop.
int NumStftFrames(int64_t num_samples, int frame_len, int hop);

/// Periodic Hann window of length n.
std::vector<double> HannWindow(int n);

/// Hann-windowed one-sided DFT per frame. frame_len must be even,
/// 0 < hop <= frame_len, and every channel at least frame_len long
/// (DataError otherwise).
Spectrogram Stft(const AudioSignal &x, int frame_len, int hop);

/// Weighted overlap-add inverse with the same Hann window, normalized by
/// the summed squared window. Exact wherever that sum is non-zero; the
/// first and last samples (window zeros) come back as 0.
AudioSignal InverseStft(const Spectrogram &spec, int64_t num_samples,
                        int sample_rate = kDefaultSampleRate);

}  // namespace tdsb

#endif  // TDSB_DSP_STFT_H_
