// tdsb/model/model.h

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

#ifndef TDSB_MODEL_MODEL_H_
#define TDSB_MODEL_MODEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdsb/autodiff/tensor.h"
#include "tdsb/dsp/audio.h"
#include "tdsb/model/topology.h"
#include "tdsb/nn/layers.h"

namespace tdsb {

/// h [B, T] scaled channelwise by e [B] or [B, 1].
Tensor AdaptationLayer(const Tensor &h, const Tensor &e);

/// Network inputs derived from a recording: channel 0 as a [1, n] row and,
/// when the topology uses IPD, the [2F, T_stft] phase-difference features
/// (cosines then sines, one column per STFT frame).
struct ModelInput {
  Tensor waveform;
  std::optional<Tensor> ipd;
};

/// Builds ModelInput. DataError when IPD is required but the recording is
/// not two-channel, or is shorter than one STFT frame.
ModelInput PrepareInput(const AudioSignal &mixture, const TopologyConfig &topo);

/// Waveform [1, n] of one channel.
Tensor WaveformTensor(const std::vector<double> &samples);

struct ExtractOutput {
  Tensor estimate;   // [1, n]
  Tensor embedding;  // [B, 1]
  Tensor mask;       // [N, T_enc]
};

struct SeparateOutput {
  Tensor estimate1;  // [1, n]
  Tensor estimate2;  // [1, n]
};

/// TD-SpeakerBeam extraction network, the two-output baseline, or the
/// passthrough reference, depending on TopologyConfig::kind.
class Model {
 public:
  Model(const TopologyConfig &topology, uint64_t seed);

  Model(const Model &) = delete;
  Model &operator=(const Model &) = delete;

  const TopologyConfig &topology() const { return topo_; }
  ParamSet &params() { return params_; }
  const ParamSet &params() const { return params_; }
  /// Speaker-ID projection W [S, B]; undefined when num_speakers == 0.
  const Tensor &speaker_projection() const { return projection_; }

  /// Speaker embedding of an adaptation utterance [1, n], n >= L.
  Tensor AuxEmbed(const Tensor &adaptation) const;

  /// Extracts the adaptation utterance's speaker from the mixture.
  /// `ipd` must be present exactly when the topology uses IPD.
  ExtractOutput Extract(const Tensor &mixture, const Tensor &adaptation,
                        const std::optional<Tensor> &ipd = std::nullopt) const;
  /// Same, with a precomputed embedding [B, 1].
  ExtractOutput ExtractWithEmbedding(
      const Tensor &mixture, const Tensor &embedding,
      const std::optional<Tensor> &ipd = std::nullopt) const;

  /// Two-source separation (baseline topology only).
  SeparateOutput Separate(const Tensor &mixture,
                          const std::optional<Tensor> &ipd = std::nullopt) const;

  /// Names of the main-path stages in execution order, e.g. "encoder",
  /// "bottleneck", "ipd_merge", "block0", "adaptation", ..., "decoder".
  std::vector<std::string> StageOrder() const;

 private:
  struct Trunk {
    Tensor encoded;  // [N, T]
    Tensor mask_logits;
    int64_t num_samples = 0;
  };
  Trunk RunTrunk(const Tensor &mixture, const Tensor *embedding,
                 const std::optional<Tensor> &ipd) const;
  Tensor Decode(const Tensor &encoded, const Tensor &mask,
                int64_t num_samples) const;
  Tensor IpdBranch(const Tensor &ipd, int target_frames) const;
  void CheckIpdArgument(const std::optional<Tensor> &ipd) const;

  TopologyConfig topo_;
  ParamSet params_;
  Encoder encoder_;
  Conv1x1 bottleneck_;
  std::vector<ConvBlock> blocks_;
  Conv1x1 mask_conv_;
  Decoder decoder_;
  // Auxiliary (speaker embedding) network.
  Encoder aux_encoder_;
  Conv1x1 aux_bottleneck_;
  ConvBlock aux_block_;
  // IPD branch.
  Conv1x1 ipd_proj_;
  ConvBlock ipd_block_;
  Conv1x1 ipd_merge_;
  Tensor projection_;
};

}  // namespace tdsb

#endif  // TDSB_MODEL_MODEL_H_
