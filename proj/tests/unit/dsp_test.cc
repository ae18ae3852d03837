// tests/unit/dsp_test.cc

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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tdsb/dsp/features.h"
#include "tdsb/dsp/mix.h"
#include "tdsb/dsp/stft.h"
#include "tdsb/dsp/wav.h"
#include "tdsb/util/error.h"

using namespace tdsb;
namespace fs = std::filesystem;

namespace {

std::vector<double> Noise(int n, uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> x(n);
  for (double &v : x) v = g(rng);
  return x;
}

fs::path TempPath(const std::string &name) {
  fs::path dir = fs::temp_directory_path() / "tdsb_dsp_test";
  fs::create_directories(dir);
  return dir / name;
}

double Wrap(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("stft frame count") {
  CHECK(NumStftFrames(8000, 256, 128) == 61);
  Spectrogram s = Stft(AudioSignal::Mono(Noise(8000, 1)), 256, 128);
  CHECK(s.num_frames == 61);
  CHECK(s.num_bins == 129);
}

TEST_CASE("stft of silence is zero") {
  Spectrogram s = Stft(AudioSignal::Mono(std::vector<double>(600, 0.0)), 256, 128);
  for (const auto &c : s.coef) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("stft rejects short signals and odd frames") {
  CHECK_THROWS_AS(Stft(AudioSignal::Mono(std::vector<double>(100, 0.0)), 256, 128),
                  DataError);
  CHECK_THROWS_AS(Stft(AudioSignal::Mono(std::vector<double>(300, 0.0)), 255, 128),
                  DataError);
}

TEST_CASE("bin-centred cosine stays in its Hann main lobe") {
  // For a Hann window the DFT of a bin-centred cosine has exactly three
  // non-zero bins with magnitudes N/4, N/8, N/8: the centre bin holds 2/3 of
  // the energy and the lobe k-1..k+1 holds all of it.
  const int n = 256, k = 20;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::cos(2.0 * std::numbers::pi * k * i / n);
  Spectrogram s = Stft(AudioSignal::Mono(x), n, n / 2);
  double total = 0.0;
  for (int f = 0; f < s.num_bins; ++f) total += std::norm(s.at(0, 0, f));
  const double centre = std::norm(s.at(0, 0, k)) / total;
  const double lobe = (std::norm(s.at(0, 0, k - 1)) + std::norm(s.at(0, 0, k)) +
                       std::norm(s.at(0, 0, k + 1))) /
                      total;
  CHECK(centre == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(lobe >= 0.99);
  CHECK(std::abs(s.at(0, 0, k)) == doctest::Approx(n / 4.0).epsilon(1e-9));
}

TEST_CASE("inverse stft reconstructs the interior") {
  const std::vector<double> x = Noise(2000, 3);
  Spectrogram s = Stft(AudioSignal::Mono(x), 256, 128);
  AudioSignal y = InverseStft(s, static_cast<int64_t>(x.size()));
  const int covered = (s.num_frames - 1) * 128 + 256;
  double err = 0.0, ref = 0.0;
  for (int i = 1; i < covered - 1; ++i) {
    err += (y.channels[0][i] - x[i]) * (y.channels[0][i] - x[i]);
    ref += x[i] * x[i];
  }
  CHECK(std::sqrt(err / ref) < 1e-6);
}

TEST_CASE("ipd of identical channels") {
  std::vector<double> x = Noise(1024, 4);
  AudioSignal sig;
  sig.channels = {x, x};
  FeatureMatrix f = IpdFeatures(Stft(sig, 256, 128));
  CHECK(f.cols == 2 * 129);
  for (int t = 0; t < f.rows; ++t)
    for (int k = 0; k < 129; ++k) {
      CHECK(std::abs(f(t, k) - 1.0) < 1e-12);
      CHECK(std::abs(f(t, 129 + k)) < 1e-12);
    }
}

// Worst wrapped deviation of the measured IPD from 2*pi*k*d/N over bins that
// hold at least 1% of their frame's energy.
double DelayTheoremError(const std::vector<double> &x, int d, int n) {
  AudioSignal sig;
  sig.channels = {x, DelaySamples(x, d)};
  Spectrogram s = Stft(sig, n, n / 2);
  FeatureMatrix f = IpdFeatures(s);
  double worst = 0.0;
  for (int t = 1; t < s.num_frames; ++t) {
    double energy = 0.0;
    for (int k = 0; k < s.num_bins; ++k) energy += std::norm(s.at(1, t, k));
    for (int k = 1; k < s.num_bins - 1; ++k) {
      if (std::norm(s.at(1, t, k)) < 0.01 * energy) continue;
      const double expected = Wrap(2.0 * std::numbers::pi * k * d / n);
      const double got = std::atan2(f(t, s.num_bins + k), f(t, k));
      worst = std::max(worst, std::abs(Wrap(got - expected)));
    }
  }
  return worst;
}

TEST_CASE("ipd follows the DFT delay theorem") {
  // The analysis window does not move with the signal, so a delay of d
  // samples leaves a residual x[n-d] (w[n] - w[n-d]) that grows with d.
  // One sample of delay on broadband input stays inside 0.05 rad.
  const std::vector<double> x = Noise(8000, 5);
  CHECK(DelayTheoremError(x, 1, 256) < 0.05);
  for (int d = 2; d <= 4; ++d) {
    INFO("delay " << d);
    CHECK(DelayTheoremError(x, d, 256) < 0.05 * d);
  }
}

TEST_CASE("ipd invariants: unit circle, antisymmetry, scale") {
  AudioSignal sig;
  sig.channels = {Noise(2048, 6), Noise(2048, 7)};
  FeatureMatrix f = IpdFeatures(Stft(sig, 256, 128));
  AudioSignal swapped;
  swapped.channels = {sig.channels[1], sig.channels[0]};
  FeatureMatrix g = IpdFeatures(Stft(swapped, 256, 128));
  AudioSignal scaled = sig;
  for (auto &c : scaled.channels)
    for (double &v : c) v *= 3.7;
  FeatureMatrix h = IpdFeatures(Stft(scaled, 256, 128));
  const int bins = f.cols / 2;
  for (int t = 0; t < f.rows; ++t)
    for (int k = 0; k < bins; ++k) {
      const double c = f(t, k), s = f(t, bins + k);
      CHECK(std::abs(c * c + s * s - 1.0) < 1e-12);
      CHECK(g(t, k) == doctest::Approx(c).epsilon(1e-9));
      CHECK(g(t, bins + k) == doctest::Approx(-s).epsilon(1e-9));
      CHECK(h(t, k) == doctest::Approx(c).epsilon(1e-9));
      CHECK(h(t, bins + k) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("ipd needs two channels") {
  CHECK_THROWS_AS(IpdFeatures(Stft(AudioSignal::Mono(Noise(512, 8)), 256, 128)),
                  DataError);
}

TEST_CASE("nearest-neighbour upsampling") {
  CHECK(UpsampleIndices(2, 4) == std::vector<int>{0, 0, 1, 1});
  CHECK(UpsampleIndices(3, 3) == std::vector<int>{0, 1, 2});
  CHECK(UpsampleIndices(3, 7) == std::vector<int>{0, 0, 0, 1, 1, 2, 2});
  FeatureMatrix c(3, 2);
  for (double &v : c.data) v = 0.25;
  FeatureMatrix u = UpsampleFrames(c, 10);
  CHECK(u.rows == 10);
  for (double v : u.data) CHECK(v == 0.25);
  CHECK_THROWS_AS(UpsampleFrames(FeatureMatrix(0, 2), 4), DataError);
}

TEST_CASE("mix at snr scaling") {
  std::vector<double> a = Noise(4000, 9);
  std::vector<double> b = Noise(4000, 10);
  // Equalize powers so the reference scale is known in closed form.
  const double gain = Rms(a) / Rms(b);
  for (double &v : b) v *= gain;
  CHECK(MixAtSnr(AudioSignal::Mono(a), AudioSignal::Mono(b), 0.0).source2_scale ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(MixAtSnr(AudioSignal::Mono(a), AudioSignal::Mono(b), 5.0).source2_scale ==
        doctest::Approx(std::pow(10.0, -5.0 / 20.0)).epsilon(1e-12));
  CHECK(std::pow(10.0, -5.0 / 20.0) == doctest::Approx(0.5623).epsilon(1e-4));
}

TEST_CASE("mix at snr: exact SNR, linear residual, shared peak gain") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> snr(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double target = snr(rng);
    const int channels = 1 + trial % 2;
    MixResult r = MixAtSnr(AudioSignal::Mono(Noise(3000, 100 + trial, 0.05)),
                           AudioSignal::Mono(Noise(2500, 200 + trial, 0.2)),
                           target, channels, 2, 4);
    CHECK(r.mixture.num_samples() == 2500);
    CHECK(r.mixture.num_channels() == channels);
    CHECK(std::abs(SnrDb(r.ref1.channels[0], r.ref2.channels[0]) - target) < 1e-9);
    double peak = 0.0;
    for (int c = 0; c < channels; ++c)
      for (int64_t n = 0; n < r.mixture.num_samples(); ++n) {
        const double resid = r.mixture.channels[c][n] - r.ref1.channels[c][n] -
                             r.ref2.channels[c][n];
        CHECK(std::abs(resid) < 1e-12);
        peak = std::max(peak, std::abs(r.mixture.channels[c][n]));
      }
    CHECK(peak == doctest::Approx(kMixturePeak).epsilon(1e-12));
    if (channels == 2) {
      CHECK(r.ref1.channels[1][10] == r.ref1.channels[0][8]);
      CHECK(r.ref2.channels[1][10] == r.ref2.channels[0][6]);
    }
  }
}

TEST_CASE("mix rejects a silent source") {
  CHECK_THROWS_AS(MixAtSnr(AudioSignal::Mono(Noise(100, 1)),
                           AudioSignal::Mono(std::vector<double>(100, 0.0)), 0.0),
                  DataError);
}

TEST_CASE("wav round trip of a ramp") {
  const fs::path p = TempPath("ramp.wav");
  WriteWav(p.string(), AudioSignal::Mono({0.0, 0.5, -0.5}));
  AudioSignal r = ReadWav(p.string());
  REQUIRE(r.num_samples() == 3);
  CHECK(r.sample_rate == 8000);
  CHECK(std::abs(r.channels[0][0] - 0.0) <= 1.0 / 32768);
  CHECK(std::abs(r.channels[0][1] - 0.5) <= 1.0 / 32768);
  CHECK(std::abs(r.channels[0][2] + 0.5) <= 1.0 / 32768);
}

TEST_CASE("wav round trip stays within one LSB and clips") {
  AudioSignal s;
  s.sample_rate = 16000;
  s.channels = {Noise(500, 12), Noise(500, 13)};
  s.channels[0][0] = 1.7;
  const fs::path p = TempPath("stereo.wav");
  WriteWav(p.string(), s);
  AudioSignal r = ReadWav(p.string());
  CHECK(r.sample_rate == 16000);
  REQUIRE(r.num_channels() == 2);
  CHECK(r.channels[0][0] == doctest::Approx(32767.0 / 32768.0));
  for (int c = 0; c < 2; ++c)
    for (int n = 1; n < 500; ++n)
      CHECK(std::abs(r.channels[c][n] - std::clamp(s.channels[c][n], -1.0, 1.0)) <=
            1.0 / 32768);
}

TEST_CASE("hand-built stereo file deinterleaves") {
  // 44-byte canonical header + 8-byte payload: two frames of (L, R).
  const unsigned char bytes[] = {
      'R', 'I', 'F', 'F', 44, 0, 0, 0, 'W', 'A', 'V', 'E',
      'f', 'm', 't', ' ', 16, 0, 0, 0, 1, 0, 2, 0,
      0x40, 0x1f, 0, 0, 0x00, 0x7d, 0, 0, 4, 0, 16, 0,
      'd', 'a', 't', 'a', 8, 0, 0, 0,
      0x00, 0x40,  // L0 = 16384
      0x00, 0xc0,  // R0 = -16384
      0x00, 0x20,  // L1 = 8192
      0xff, 0x7f,  // R1 = 32767
  };
  const fs::path p = TempPath("hand.wav");
  std::ofstream(p, std::ios::binary)
      .write(reinterpret_cast<const char *>(bytes), sizeof(bytes));
  AudioSignal r = ReadWav(p.string());
  REQUIRE(r.num_channels() == 2);
  REQUIRE(r.num_samples() == 2);
  CHECK(r.sample_rate == 8000);
  CHECK(r.channels[0] == std::vector<double>{0.5, 0.25});
  CHECK(r.channels[1] == std::vector<double>{-0.5, 32767.0 / 32768.0});
}

TEST_CASE("wav errors name the problem") {
  const fs::path empty = TempPath("empty.wav");
  std::ofstream(empty, std::ios::binary).close();
  try {
    ReadWav(empty.string());
    FAIL("expected DataError");
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find("malformed") != std::string::npos);
  }

  const unsigned char eight_bit[] = {
      'R', 'I', 'F', 'F', 38, 0, 0, 0, 'W', 'A', 'V', 'E',
      'f', 'm', 't', ' ', 16, 0, 0, 0, 1, 0, 1, 0,
      0x40, 0x1f, 0, 0, 0x40, 0x1f, 0, 0, 1, 0, 8, 0,
      'd', 'a', 't', 'a', 2, 0, 0, 0, 0x80, 0x80};
  const fs::path p = TempPath("u8.wav");
  std::ofstream(p, std::ios::binary)
      .write(reinterpret_cast<const char *>(eight_bit), sizeof(eight_bit));
  try {
    ReadWav(p.string());
    FAIL("expected DataError");
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find("bits per sample") != std::string::npos);
  }
  CHECK_THROWS_AS(ReadWav(TempPath("does-not-exist.wav").string()), DataError);
}
