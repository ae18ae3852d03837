// tdsb/model/topology.h

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

#ifndef TDSB_MODEL_TOPOLOGY_H_
#define TDSB_MODEL_TOPOLOGY_H_

#include <string>
#include <string_view>

namespace tdsb {

enum class ModelKind {
  kSpeakerBeam,  // target-speaker extraction, one output
  kTasNet,       // two-output separation baseline trained with PIT
  kPassthrough,  // returns the mixture unchanged; lower-bound reference
};

enum class IpdMode { kNone, kInput, kInternal };

std::string_view ModelKindName(ModelKind k);
std::string_view IpdModeName(IpdMode m);
/// Parse "td-spkbeam" / "tasnet" / "passthrough"; UsageError otherwise.
ModelKind ParseModelKind(std::string_view s);
/// Parse "none" / "input" / "internal"; UsageError otherwise.
IpdMode ParseIpdMode(std::string_view s);

/// Network sizes. N filters of length L in the encoder/decoder, B bottleneck
/// channels, H hidden channels and kernel P inside each block, X blocks per
/// repeat with dilations 1..2^(X-1), R repeats.
struct TopologyConfig {
  ModelKind kind = ModelKind::kSpeakerBeam;
  IpdMode ipd_mode = IpdMode::kNone;
  int N = 64;
  int L = 16;
  int B = 32;
  int H = 64;
  int P = 3;
  int X = 4;
  int R = 2;
  int num_outputs = 1;    // 1 for extraction, 2 for the baseline
  int embedding_dim = 32; // always equal to B
  int num_speakers = 0;   // rows of the speaker-ID projection W (0: none)
  int stft_frame = 256;   // IPD analysis, in samples
  int stft_hop = 128;

  int num_bins() const { return stft_frame / 2 + 1; }
  int ipd_dim() const { return 2 * num_bins(); }
  int num_blocks() const { return X * R; }

  /// Sets num_outputs and embedding_dim from kind and B.
  void Normalize();
  /// Throws UsageError naming the first violated constraint.
  void Validate() const;

  /// Small network that trains in minutes on one core.
  static TopologyConfig Desk();
  /// Full-size configuration N=256, L=20, B=256, H=512, P=3, X=8, R=4 with
  /// 32 ms / 16 ms STFT at 8 kHz.
  static TopologyConfig PaperScale();
  /// Tiny network for end-to-end finite-difference checks.
  static TopologyConfig Miniature();
  /// Named preset: "desk", "paper" or "mini".
  static TopologyConfig Preset(std::string_view name);
};

bool operator==(const TopologyConfig &a, const TopologyConfig &b);

}  // namespace tdsb

#endif  // TDSB_MODEL_TOPOLOGY_H_
