// src/dsp/stft.cc

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

#include "tdsb/dsp/stft.h"

#include <cmath>
#include <numbers>
#include <string>

#include "tdsb/util/error.h"

namespace tdsb {

namespace {

// Twiddle table e^{-i 2 pi k n / N} for k in [0, N/2], n in [0, N).
struct DftTable {
  int n = 0;
  std::vector<double> cos_t, sin_t;

  explicit DftTable(int len) : n(len) {
    const int bins = len / 2 + 1;
    cos_t.resize(static_cast<size_t>(bins) * len);
    sin_t.resize(cos_t.size());
    for (int k = 0; k < bins; ++k)
      for (int j = 0; j < len; ++j) {
        // Reduce k*j mod N first so the angle stays small and exact.
        const double a = 2.0 * std::numbers::pi *
                         static_cast<double>((static_cast<int64_t>(k) * j) % len) /
                         len;
        cos_t[static_cast<size_t>(k) * len + j] = std::cos(a);
        sin_t[static_cast<size_t>(k) * len + j] = std::sin(a);
      }
  }
};

}  // namespace

int NumStftFrames(int64_t num_samples, int frame_len, int hop) {
  if (num_samples < frame_len) return 0;
  return 1 + static_cast<int>((num_samples - frame_len) / hop);
}

std::vector<double> HannWindow(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

Spectrogram Stft(const AudioSignal &x, int frame_len, int hop) {
  x.Validate();
  if (frame_len <= 0 || frame_len % 2 != 0)
    throw DataError("stft: frame length must be positive and even, got " +
                    std::to_string(frame_len));
  if (hop <= 0 || hop > frame_len)
    throw DataError("stft: hop must be in (0, frame_len], got " +
                    std::to_string(hop));
  if (x.num_samples() < frame_len)
    throw DataError("stft: signal of " + std::to_string(x.num_samples()) +
                    " samples is shorter than one frame (" +
                    std::to_string(frame_len) + ")");
  Spectrogram s;
  s.num_channels = x.num_channels();
  s.num_frames = NumStftFrames(x.num_samples(), frame_len, hop);
  s.num_bins = frame_len / 2 + 1;
  s.frame_len = frame_len;
  s.hop = hop;
  s.coef.resize(static_cast<size_t>(s.num_channels) * s.num_frames * s.num_bins);

  const DftTable table(frame_len);
  const std::vector<double> win = HannWindow(frame_len);
  std::vector<double> frame(frame_len);
  for (int c = 0; c < s.num_channels; ++c) {
    const auto &samples = x.channels[c];
    for (int t = 0; t < s.num_frames; ++t) {
      const int64_t start = static_cast<int64_t>(t) * hop;
      for (int j = 0; j < frame_len; ++j) frame[j] = samples[start + j] * win[j];
      for (int k = 0; k < s.num_bins; ++k) {
        const double *ct = table.cos_t.data() + static_cast<size_t>(k) * frame_len;
        const double *st = table.sin_t.data() + static_cast<size_t>(k) * frame_len;
        double re = 0.0, im = 0.0;
        for (int j = 0; j < frame_len; ++j) {
          re += frame[j] * ct[j];
          im -= frame[j] * st[j];
        }
        s.at(c, t, k) = {re, im};
      }
    }
  }
  return s;
}

AudioSignal InverseStft(const Spectrogram &spec, int64_t num_samples,
                        int sample_rate) {
  const int n = spec.frame_len;
  const DftTable table(n);
  const std::vector<double> win = HannWindow(n);
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.channels.assign(spec.num_channels, std::vector<double>(num_samples, 0.0));
  std::vector<double> norm(num_samples, 0.0);
  for (int t = 0; t < spec.num_frames; ++t) {
    const int64_t start = static_cast<int64_t>(t) * spec.hop;
    for (int j = 0; j < n && start + j < num_samples; ++j)
      norm[start + j] += win[j] * win[j];
  }
  std::vector<double> frame(n);
  for (int c = 0; c < spec.num_channels; ++c) {
    for (int t = 0; t < spec.num_frames; ++t) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < spec.num_bins; ++k) {
          const auto &y = spec.at(c, t, k);
          const double wgt = (k == 0 || k == n / 2) ? 1.0 : 2.0;
          const size_t idx = static_cast<size_t>(k) * n + j;
          acc += wgt * (y.real() * table.cos_t[idx] - y.imag() * table.sin_t[idx]);
        }
        frame[j] = acc / n;
      }
      const int64_t start = static_cast<int64_t>(t) * spec.hop;
      for (int j = 0; j < n && start + j < num_samples; ++j)
        out.channels[c][start + j] += frame[j] * win[j];
    }
    for (int64_t i = 0; i < num_samples; ++i)
      out.channels[c][i] = norm[i] > 1e-10 ? out.channels[c][i] / norm[i] : 0.0;
  }
  return out;
}

}  // namespace tdsb
