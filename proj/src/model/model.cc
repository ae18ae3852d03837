// src/model/model.cc

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

#include "tdsb/model/model.h"

#include <algorithm>

#include "tdsb/autodiff/ops.h"
#include "tdsb/dsp/features.h"
#include "tdsb/dsp/stft.h"
#include "tdsb/util/error.h"

namespace tdsb {

Tensor AdaptationLayer(const Tensor &h, const Tensor &e) {
  if (h.rank() != 2) throw ShapeError("adaptation input must be [B, T]");
  const int b = h.dim(0);
  const bool column = e.rank() == 2 && e.dim(0) == b && e.dim(1) == 1;
  const bool vector = e.rank() == 1 && e.dim(0) == b;
  if (!column && !vector)
    throw ShapeError("embedding of shape " + ShapeString(e.shape()) +
                     " does not match " + std::to_string(b) + " channels");
  return Mul(h, column ? e : Reshape(e, {b, 1}));
}

Tensor WaveformTensor(const std::vector<double> &samples) {
  if (samples.empty()) throw DataError("empty waveform");
  return Tensor::FromData({1, static_cast<int>(samples.size())}, samples);
}

ModelInput PrepareInput(const AudioSignal &mixture, const TopologyConfig &topo) {
  mixture.Validate();
  ModelInput in;
  in.waveform = WaveformTensor(mixture.channel(0));
  if (topo.ipd_mode == IpdMode::kNone || topo.kind == ModelKind::kPassthrough)
    return in;
  if (mixture.num_channels() != 2)
    throw DataError("IPD mode '" + std::string(IpdModeName(topo.ipd_mode)) +
                    "' needs a 2-channel mixture, got " +
                    std::to_string(mixture.num_channels()) + " channel(s)");
  FeatureMatrix f = IpdFeatures(Stft(mixture, topo.stft_frame, topo.stft_hop));
  std::vector<double> t(f.data.size());
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) t[size_t(c) * f.rows + r] = f(r, c);
  in.ipd = Tensor::FromData({f.cols, f.rows}, std::move(t));
  return in;
}

Model::Model(const TopologyConfig &topology, uint64_t seed) : topo_(topology) {
  topo_.Normalize();
  topo_.Validate();
  if (topo_.kind == ModelKind::kPassthrough) return;
  Initializer init(seed);
  const int n = topo_.N, b = topo_.B;
  encoder_ = Encoder(params_, "encoder", n, topo_.L, init);
  bottleneck_ = Conv1x1(params_, "bottleneck", n, b, init);
  for (int i = 0; i < topo_.num_blocks(); ++i) {
    ConvBlockConfig cfg{b, topo_.H, topo_.P, 1 << (i % topo_.X)};
    blocks_.emplace_back(params_, "block" + std::to_string(i), cfg, init);
  }
  mask_conv_ = Conv1x1(params_, "mask", b, n * topo_.num_outputs, init);
  decoder_ = Decoder(params_, "decoder", n, topo_.L, init);

  if (topo_.kind == ModelKind::kSpeakerBeam) {
    aux_encoder_ = Encoder(params_, "aux.encoder", n, topo_.L, init);
    aux_bottleneck_ = Conv1x1(params_, "aux.bottleneck", n, b, init);
    aux_block_ = ConvBlock(params_, "aux.block", {b, topo_.H, topo_.P, 1}, init);
    if (topo_.num_speakers > 0)
      projection_ = params_.Add("speaker_projection",
                                init.Uniform({topo_.num_speakers, b}, b));
  }
  if (topo_.ipd_mode != IpdMode::kNone) {
    ipd_proj_ = Conv1x1(params_, "ipd.proj", topo_.ipd_dim(), b, init);
    if (topo_.ipd_mode == IpdMode::kInternal)
      ipd_block_ = ConvBlock(params_, "ipd.block", {b, topo_.H, topo_.P, 1}, init);
    ipd_merge_ = Conv1x1(params_, "ipd.merge", 2 * b, b, init);
  }
}

Tensor Model::AuxEmbed(const Tensor &adaptation) const {
  if (topo_.kind != ModelKind::kSpeakerBeam)
    throw UsageError("model '" + std::string(ModelKindName(topo_.kind)) +
                     "' has no auxiliary network");
  Tensor h = aux_bottleneck_.Forward(aux_encoder_.Forward(adaptation));
  return Mean(aux_block_.Forward(h), 1);
}

void Model::CheckIpdArgument(const std::optional<Tensor> &ipd) const {
  if (topo_.ipd_mode == IpdMode::kNone) {
    if (ipd) throw UsageError("IPD features supplied to a model without IPD input");
    return;
  }
  if (!ipd)
    throw DataError("IPD mode '" + std::string(IpdModeName(topo_.ipd_mode)) +
                    "' requires IPD features");
  if (ipd->rank() != 2 || ipd->dim(0) != topo_.ipd_dim())
    throw ShapeError("IPD features must be [" + std::to_string(topo_.ipd_dim()) +
                     ", T_stft], got " + ShapeString(ipd->shape()));
}

Tensor Model::IpdBranch(const Tensor &ipd, int target_frames) const {
  Tensor p = ipd_proj_.Forward(ipd);
  p = IndexSelect(p, 1, UpsampleIndices(ipd.dim(1), target_frames));
  if (topo_.ipd_mode == IpdMode::kInternal) p = ipd_block_.Forward(p);
  return p;
}

Model::Trunk Model::RunTrunk(const Tensor &mixture, const Tensor *embedding,
                             const std::optional<Tensor> &ipd) const {
  if (mixture.rank() != 2 || mixture.dim(0) != 1)
    throw ShapeError("mixture must be [1, samples], got " +
                     ShapeString(mixture.shape()));
  CheckIpdArgument(ipd);
  Trunk out;
  out.num_samples = mixture.dim(1);

  // Zero-pad so the encoder frames cover every input sample.
  const int len = mixture.dim(1), l = topo_.L, hop = l / 2;
  int padded = l;
  if (len > l) padded = l + (len - l + hop - 1) / hop * hop;
  Tensor y = mixture;
  if (padded > len) {
    Tensor zeros = Tensor::Zeros({1, padded - len});
    const Tensor parts[] = {mixture, zeros};
    y = Concat(parts, 1);
  }

  out.encoded = encoder_.Forward(y);
  const int frames = out.encoded.dim(1);
  Tensor h = bottleneck_.Forward(out.encoded);
  auto merge = [&](const Tensor &cur) {
    const Tensor parts[] = {cur, IpdBranch(*ipd, frames)};
    return ipd_merge_.Forward(Concat(parts, 0));
  };
  if (topo_.ipd_mode == IpdMode::kInput) h = merge(h);
  h = blocks_[0].Forward(h);
  if (embedding) h = AdaptationLayer(h, *embedding);
  if (topo_.ipd_mode == IpdMode::kInternal) h = merge(h);
  for (size_t i = 1; i < blocks_.size(); ++i) h = blocks_[i].Forward(h);
  out.mask_logits = mask_conv_.Forward(h);
  return out;
}

Tensor Model::Decode(const Tensor &encoded, const Tensor &mask,
                     int64_t num_samples) const {
  Tensor wave = decoder_.Forward(Mul(encoded, mask));
  return Slice(wave, 1, 0, static_cast<int>(num_samples));
}

ExtractOutput Model::Extract(const Tensor &mixture, const Tensor &adaptation,
                             const std::optional<Tensor> &ipd) const {
  if (topo_.kind == ModelKind::kPassthrough) {
    CheckIpdArgument(ipd);
    return {mixture.Detach(), Tensor(), Tensor()};
  }
  return ExtractWithEmbedding(mixture, AuxEmbed(adaptation), ipd);
}

ExtractOutput Model::ExtractWithEmbedding(const Tensor &mixture,
                                          const Tensor &embedding,
                                          const std::optional<Tensor> &ipd) const {
  if (topo_.kind == ModelKind::kPassthrough) {
    CheckIpdArgument(ipd);
    return {mixture.Detach(), embedding, Tensor()};
  }
  if (topo_.kind != ModelKind::kSpeakerBeam)
    throw UsageError("the separation baseline has no extraction mode");
  Trunk t = RunTrunk(mixture, &embedding, ipd);
  ExtractOutput out;
  out.mask = Sigmoid(t.mask_logits);
  out.embedding = embedding;
  out.estimate = Decode(t.encoded, out.mask, t.num_samples);
  return out;
}

SeparateOutput Model::Separate(const Tensor &mixture,
                               const std::optional<Tensor> &ipd) const {
  if (topo_.kind == ModelKind::kPassthrough) {
    CheckIpdArgument(ipd);
    return {mixture.Detach(), mixture.Detach()};
  }
  if (topo_.kind != ModelKind::kTasNet)
    throw UsageError("model '" + std::string(ModelKindName(topo_.kind)) +
                     "' is not a separation model");
  Trunk t = RunTrunk(mixture, nullptr, ipd);
  const int n = topo_.N;
  SeparateOutput out;
  out.estimate1 =
      Decode(t.encoded, Sigmoid(Slice(t.mask_logits, 0, 0, n)), t.num_samples);
  out.estimate2 =
      Decode(t.encoded, Sigmoid(Slice(t.mask_logits, 0, n, 2 * n)), t.num_samples);
  return out;
}

std::vector<std::string> Model::StageOrder() const {
  if (topo_.kind == ModelKind::kPassthrough) return {"identity"};
  std::vector<std::string> s = {"encoder", "bottleneck"};
  if (topo_.ipd_mode == IpdMode::kInput) s.push_back("ipd_merge");
  s.push_back("block0");
  if (topo_.kind == ModelKind::kSpeakerBeam) s.push_back("adaptation");
  if (topo_.ipd_mode == IpdMode::kInternal) s.push_back("ipd_merge");
  for (size_t i = 1; i < blocks_.size(); ++i)
    s.push_back("block" + std::to_string(i));
  s.push_back("mask");
  s.push_back("decoder");
  return s;
}

}  // namespace tdsb
