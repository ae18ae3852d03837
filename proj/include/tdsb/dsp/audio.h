// tdsb/dsp/audio.h

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

#ifndef TDSB_DSP_AUDIO_H_
#define TDSB_DSP_AUDIO_H_

#include <cstdint>
#include <string>
#include <vector>

namespace tdsb {

inline constexpr int kDefaultSampleRate = 8000;

/// Sampled waveform, one vector per channel (mono or stereo).
struct AudioSignal {
  std::vector<std::vector<double>> channels;
  int sample_rate = kDefaultSampleRate;

  static AudioSignal Mono(std::vector<double> samples,
                          int sample_rate = kDefaultSampleRate);

  int num_channels() const { return static_cast<int>(channels.size()); }
  int64_t num_samples() const {
    return channels.empty() ? 0 : static_cast<int64_t>(channels[0].size());
  }
  const std::vector<double> &channel(int c) const { return channels.at(c); }

  /// Throws DataError unless channels are non-empty in count, of equal
  /// length, and the sample rate is positive.
  void Validate() const;
};

/// Mean square of a sample sequence (0 for empty input).
double Power(const std::vector<double> &x);

/// Root mean square.
double Rms(const std::vector<double> &x);

}  // namespace tdsb

#endif  // TDSB_DSP_AUDIO_H_
