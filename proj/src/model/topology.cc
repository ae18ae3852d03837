// src/model/topology.cc

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

#include "tdsb/model/topology.h"

#include "tdsb/util/error.h"

namespace tdsb {

std::string_view ModelKindName(ModelKind k) {
  switch (k) {
    case ModelKind::kSpeakerBeam: return "td-spkbeam";
    case ModelKind::kTasNet: return "tasnet";
    case ModelKind::kPassthrough: return "passthrough";
  }
  return "?";
}

std::string_view IpdModeName(IpdMode m) {
  switch (m) {
    case IpdMode::kNone: return "none";
    case IpdMode::kInput: return "input";
    case IpdMode::kInternal: return "internal";
  }
  return "?";
}

ModelKind ParseModelKind(std::string_view s) {
  for (ModelKind k : {ModelKind::kSpeakerBeam, ModelKind::kTasNet,
                      ModelKind::kPassthrough})
    if (s == ModelKindName(k)) return k;
  throw UsageError("unknown model '" + std::string(s) +
                   "' (expected td-spkbeam, tasnet or passthrough)");
}

IpdMode ParseIpdMode(std::string_view s) {
  for (IpdMode m : {IpdMode::kNone, IpdMode::kInput, IpdMode::kInternal})
    if (s == IpdModeName(m)) return m;
  throw UsageError("unknown IPD mode '" + std::string(s) +
                   "' (expected none, input or internal)");
}

void TopologyConfig::Normalize() {
  num_outputs = kind == ModelKind::kTasNet ? 2 : 1;
  embedding_dim = B;
}

void TopologyConfig::Validate() const {
  auto fail = [](const std::string &msg) { throw UsageError("topology: " + msg); };
  if (kind == ModelKind::kPassthrough) return;
  if (N < 1 || B < 1 || H < 1 || X < 1 || R < 1)
    fail("N, B, H, X and R must be positive");
  if (L < 2 || L % 2) fail("L must be even and >= 2");
  if (P < 1 || P % 2 == 0) fail("P must be odd");
  if (embedding_dim != B) fail("embedding_dim must equal B");
  if (kind == ModelKind::kSpeakerBeam && num_outputs != 1)
    fail("extraction topology must have one output");
  if (kind == ModelKind::kTasNet) {
    if (num_outputs != 2) fail("baseline topology must have two outputs");
    if (ipd_mode == IpdMode::kInternal)
      fail("internal IPD combination requires the adaptation layer");
  }
  if (num_speakers < 0) fail("num_speakers must be >= 0");
  if (ipd_mode != IpdMode::kNone &&
      (stft_frame < 2 || stft_frame % 2 || stft_hop < 1 || stft_hop > stft_frame))
    fail("STFT frame must be even and hop in [1, frame]");
}

TopologyConfig TopologyConfig::Desk() { return TopologyConfig{}; }

TopologyConfig TopologyConfig::PaperScale() {
  TopologyConfig t;
  t.N = 256;
  t.L = 20;
  t.B = 256;
  t.H = 512;
  t.P = 3;
  t.X = 8;
  t.R = 4;
  t.stft_frame = 256;
  t.stft_hop = 128;
  t.Normalize();
  return t;
}

TopologyConfig TopologyConfig::Miniature() {
  TopologyConfig t;
  t.N = 8;
  t.L = 4;
  t.B = 8;
  t.H = 12;
  t.P = 3;
  t.X = 2;
  t.R = 1;
  t.stft_frame = 16;
  t.stft_hop = 8;
  t.Normalize();
  return t;
}

TopologyConfig TopologyConfig::Preset(std::string_view name) {
  if (name == "desk") return Desk();
  if (name == "paper") return PaperScale();
  if (name == "mini") return Miniature();
  throw UsageError("unknown topology preset '" + std::string(name) +
                   "' (expected desk, paper or mini)");
}

bool operator==(const TopologyConfig &a, const TopologyConfig &b) {
  return a.kind == b.kind && a.ipd_mode == b.ipd_mode && a.N == b.N &&
         a.L == b.L && a.B == b.B && a.H == b.H && a.P == b.P && a.X == b.X &&
         a.R == b.R && a.num_outputs == b.num_outputs &&
         a.embedding_dim == b.embedding_dim &&
         a.num_speakers == b.num_speakers && a.stft_frame == b.stft_frame &&
         a.stft_hop == b.stft_hop;
}

}  // namespace tdsb
