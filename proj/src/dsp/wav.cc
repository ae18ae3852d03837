// src/dsp/wav.cc

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

#include "tdsb/dsp/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "tdsb/util/error.h"

namespace tdsb {

namespace {

uint32_t ReadU32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t ReadU16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<unsigned char> &out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}
void PutU16(std::vector<unsigned char> &out, uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}
void PutTag(std::vector<unsigned char> &out, const char *tag) {
  out.insert(out.end(), tag, tag + 4);
}

[[noreturn]] void Malformed(const std::string &path, const std::string &what) {
  throw DataError("malformed WAV header in " + path + ": " + what);
}

}  // namespace

AudioSignal AudioSignal::Mono(std::vector<double> samples, int sample_rate) {
  AudioSignal s;
  s.channels.push_back(std::move(samples));
  s.sample_rate = sample_rate;
  return s;
}

void AudioSignal::Validate() const {
  if (sample_rate <= 0)
    throw DataError("sample rate must be positive, got " +
                    std::to_string(sample_rate));
  if (channels.empty()) throw DataError("audio signal has no channels");
  for (const auto &c : channels)
    if (c.size() != channels[0].size())
      throw DataError("audio channels differ in length");
}

double Power(const std::vector<double> &x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

double Rms(const std::vector<double> &x) { return std::sqrt(Power(x)); }

AudioSignal ReadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12) Malformed(path, "file shorter than RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0)
    Malformed(path, "missing RIFF tag");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Malformed(path, "missing WAVE tag");

  bool have_fmt = false;
  uint16_t channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const uint32_t size = ReadU32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size())
      Malformed(path, "chunk '" + std::string(chunk, chunk + 4) +
                          "' runs past end of file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) Malformed(path, "fmt chunk too short");
      const unsigned char *f = bytes.data() + body;
      const uint16_t format = ReadU16(f);
      channels = ReadU16(f + 2);
      rate = ReadU32(f + 4);
      bits = ReadU16(f + 14);
      if (format != 1)
        throw DataError("unsupported WAV encoding in " + path +
                        ": format tag " + std::to_string(format) +
                        " (only PCM=1)");
      if (bits != 16)
        throw DataError("unsupported WAV encoding in " + path +
                        ": bits per sample " + std::to_string(bits) +
                        " (only 16)");
      if (channels < 1 || channels > 2)
        throw DataError("unsupported WAV encoding in " + path +
                        ": channel count " + std::to_string(channels) +
                        " (only 1 or 2)");
      if (rate == 0) Malformed(path, "sample rate is zero");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) Malformed(path, "data chunk before fmt chunk");
      const size_t frame_bytes = 2u * channels;
      if (size % frame_bytes != 0)
        Malformed(path, "data size not a multiple of the frame size");
      const size_t frames = size / frame_bytes;
      AudioSignal sig;
      sig.sample_rate = static_cast<int>(rate);
      sig.channels.assign(channels, std::vector<double>(frames));
      const unsigned char *d = bytes.data() + body;
      for (size_t n = 0; n < frames; ++n)
        for (int c = 0; c < channels; ++c) {
          const int16_t q =
              static_cast<int16_t>(ReadU16(d + (n * channels + c) * 2));
          sig.channels[c][n] = q / 32768.0;
        }
      return sig;
    }
    pos = body + size + (size & 1);
  }
  Malformed(path, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

void WriteWav(const std::string &path, const AudioSignal &signal) {
  signal.Validate();
  if (signal.num_channels() > 2)
    throw DataError("WAV writer supports at most 2 channels");
  const uint16_t channels = static_cast<uint16_t>(signal.num_channels());
  const uint32_t frames = static_cast<uint32_t>(signal.num_samples());
  const uint32_t data_bytes = frames * channels * 2;
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, channels);
  PutU32(out, static_cast<uint32_t>(signal.sample_rate));
  PutU32(out, static_cast<uint32_t>(signal.sample_rate) * channels * 2);
  PutU16(out, static_cast<uint16_t>(channels * 2));
  PutU16(out, 16);
  PutTag(out, "data");
  PutU32(out, data_bytes);
  for (uint32_t n = 0; n < frames; ++n)
    for (int c = 0; c < channels; ++c) {
      const double v = std::clamp(signal.channels[c][n], -1.0, 1.0);
      const long q = std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
      PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
    }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char *>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("write failed for " + path);
}

}  // namespace tdsb
