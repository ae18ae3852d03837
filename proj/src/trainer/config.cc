// src/trainer/config.cc

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

#include "tdsb/trainer/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "tdsb/util/error.h"

namespace tdsb {

int64_t TrainConfig::SegmentSamples(int sample_rate) const {
  return std::llround(segment_s * sample_rate);
}

void TrainConfig::Validate(int sample_rate) const {
  auto fail = [](const std::string &msg) { throw UsageError("train config: " + msg); };
  topology.Validate();
  if (!(lr > 0.0)) fail("lr must be > 0");
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (max_epochs < 0) fail("max_epochs must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(clip_norm >= 0.0)) fail("clip_norm must be >= 0");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (!(valid_fraction >= 0.0 && valid_fraction < 1.0))
    fail("valid_fraction must be in [0, 1)");
  if (lr_patience < 1) fail("lr_patience must be >= 1");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must be in (0, 1]");
  if (SegmentSamples(sample_rate) < topology.L)
    fail("segment_s is shorter than one encoder window (L samples)");
}

namespace {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string &v) {
  T out{};
  const char *end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw UsageError("invalid value '" + v + "'");
  return out;
}

}  // namespace

TrainConfig ParseTrainConfig(const std::string &text, const std::string &source) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto where = [&](int line) { return source + ":" + std::to_string(line) + ": "; };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(where(line_no) + "expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw UsageError(where(line_no) + "expected key = value");
    if (entries.count(key))
      throw UsageError(where(line_no) + "duplicate key '" + key + "'");
    entries[key] = {value, line_no};
    order.push_back(key);
  }

  TrainConfig cfg;
  if (auto it = entries.find("preset"); it != entries.end()) {
    try {
      cfg.topology = TopologyConfig::Preset(it->second.value);
    } catch (const UsageError &e) {
      throw UsageError(where(it->second.line) + e.what());
    }
  }

  TopologyConfig &t = cfg.topology;
  using Setter = std::function<void(const std::string &)>;
  auto integer = [](int &field) -> Setter {
    return [&field](const std::string &v) { field = ParseNumber<int>(v); };
  };
  auto real = [](double &field) -> Setter {
    return [&field](const std::string &v) { field = ParseNumber<double>(v); };
  };
  const std::map<std::string, Setter> setters = {
      {"preset", [](const std::string &) {}},
      {"model", [&](const std::string &v) { t.kind = ParseModelKind(v); }},
      {"ipd", [&](const std::string &v) { t.ipd_mode = ParseIpdMode(v); }},
      {"N", integer(t.N)},
      {"L", integer(t.L)},
      {"B", integer(t.B)},
      {"H", integer(t.H)},
      {"P", integer(t.P)},
      {"X", integer(t.X)},
      {"R", integer(t.R)},
      {"stft_frame", integer(t.stft_frame)},
      {"stft_hop", integer(t.stft_hop)},
      {"alpha", real(cfg.alpha)},
      {"lr", real(cfg.lr)},
      {"max_epochs", integer(cfg.max_epochs)},
      {"batch_size", integer(cfg.batch_size)},
      {"clip_norm", real(cfg.clip_norm)},
      {"seed", [&](const std::string &v) { cfg.seed = ParseNumber<uint64_t>(v); }},
      {"segment_s", real(cfg.segment_s)},
      {"eval_every", integer(cfg.eval_every)},
      {"valid_fraction", real(cfg.valid_fraction)},
      {"lr_patience", integer(cfg.lr_patience)},
      {"lr_decay", real(cfg.lr_decay)},
  };
  for (const std::string &key : order) {
    const Entry &e = entries[key];
    auto it = setters.find(key);
    if (it == setters.end())
      throw UsageError(where(e.line) + "unknown key '" + key + "'");
    try {
      it->second(e.value);
    } catch (const UsageError &err) {
      throw UsageError(where(e.line) + key + ": " + err.what());
    }
  }
  t.Normalize();
  return cfg;
}

TrainConfig LoadTrainConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseTrainConfig(ss.str(), path);
}

}  // namespace tdsb
