// tdsb/dsp/mix.h

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

#ifndef TDSB_DSP_MIX_H_
#define TDSB_DSP_MIX_H_

#include <vector>

#include "tdsb/dsp/audio.h"

namespace tdsb {

/// Peak level of the mixture after normalization.
inline constexpr double kMixturePeak = 0.9;

struct MixResult {
  AudioSignal mixture;
  // Per-channel supervision targets: the sources exactly as they appear in
  // the mixture (SNR scaling, delay, peak gain applied).
  AudioSignal ref1;
  AudioSignal ref2;
  double source2_scale = 1.0;  // amplitude factor applied to s2 for the SNR
  double peak_gain = 1.0;      // common factor applied after mixing
};

/// Mixes two mono sources so that 10 log10(P(s1) / P(scaled s2)) == snr_db.
/// Sources are trimmed to the shorter length. With two channels, channel 1
/// carries source k delayed by delay_k samples relative to channel 0 (a
/// minimal stand-in for room acoustics). Finally every output is scaled so
/// the mixture peaks at kMixturePeak. Throws DataError on a silent source
/// or mismatched sample rates.
MixResult MixAtSnr(const AudioSignal &s1, const AudioSignal &s2, double snr_db,
                   int num_channels = 1, int delay1 = 0, int delay2 = 0);

/// x delayed by d >= 0 samples, zero-filled, same length.
std::vector<double> DelaySamples(const std::vector<double> &x, int d);

/// 10 log10(P(a) / P(b)).
double SnrDb(const std::vector<double> &a, const std::vector<double> &b);

}  // namespace tdsb

#endif  // TDSB_DSP_MIX_H_
