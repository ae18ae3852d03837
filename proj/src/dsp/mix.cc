// src/dsp/mix.cc

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

#include "tdsb/dsp/mix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdsb/util/error.h"

namespace tdsb {

std::vector<double> DelaySamples(const std::vector<double> &x, int d) {
  if (d < 0) throw DataError("negative delay " + std::to_string(d));
  std::vector<double> y(x.size(), 0.0);
  for (size_t n = static_cast<size_t>(d); n < x.size(); ++n) y[n] = x[n - d];
  return y;
}

double SnrDb(const std::vector<double> &a, const std::vector<double> &b) {
  return 10.0 * std::log10(Power(a) / Power(b));
}

MixResult MixAtSnr(const AudioSignal &s1, const AudioSignal &s2, double snr_db,
                   int num_channels, int delay1, int delay2) {
  s1.Validate();
  s2.Validate();
  if (s1.sample_rate != s2.sample_rate)
    throw DataError("mix: sample rates differ (" +
                    std::to_string(s1.sample_rate) + " vs " +
                    std::to_string(s2.sample_rate) + ")");
  if (num_channels < 1 || num_channels > 2)
    throw DataError("mix: channel count must be 1 or 2");
  const size_t len = std::min(s1.channels[0].size(), s2.channels[0].size());
  std::vector<double> a(s1.channels[0].begin(), s1.channels[0].begin() + len);
  std::vector<double> b(s2.channels[0].begin(), s2.channels[0].begin() + len);
  const double p1 = Power(a), p2 = Power(b);
  if (p1 <= 0.0) throw DataError("mix: source 1 is silent (zero power)");
  if (p2 <= 0.0) throw DataError("mix: source 2 is silent (zero power)");

  MixResult r;
  r.source2_scale = std::sqrt(p1 / (p2 * std::pow(10.0, snr_db / 10.0)));
  for (double &v : b) v *= r.source2_scale;

  const int delays1[2] = {0, delay1};
  const int delays2[2] = {0, delay2};
  for (AudioSignal *sig : {&r.mixture, &r.ref1, &r.ref2}) {
    sig->sample_rate = s1.sample_rate;
    sig->channels.clear();
  }
  double peak = 0.0;
  for (int c = 0; c < num_channels; ++c) {
    r.ref1.channels.push_back(DelaySamples(a, delays1[c]));
    r.ref2.channels.push_back(DelaySamples(b, delays2[c]));
    std::vector<double> m(len);
    for (size_t n = 0; n < len; ++n) {
      m[n] = r.ref1.channels[c][n] + r.ref2.channels[c][n];
      peak = std::max(peak, std::abs(m[n]));
    }
    r.mixture.channels.push_back(std::move(m));
  }
  r.peak_gain = peak > 0.0 ? kMixturePeak / peak : 1.0;
  for (AudioSignal *sig : {&r.mixture, &r.ref1, &r.ref2})
    for (auto &ch : sig->channels)
      for (double &v : ch) v *= r.peak_gain;
  return r;
}

}  // namespace tdsb
