// src/model/model_gradcheck.cc

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

#include "tdsb/model/model_gradcheck.h"

#include <random>
#include <string>

#include "tdsb/loss/loss.h"
#include "tdsb/model/model.h"

namespace tdsb {
namespace {

std::vector<double> Gaussian(int n, std::mt19937_64 &rng) {
  std::normal_distribution<double> d(0.0, 0.3);
  std::vector<double> v(n);
  for (double &x : v) x = d(rng);
  return v;
}

}  // namespace

std::vector<GradCheckRecord> RunModelGradientCheck(ModelKind kind,
                                                   IpdMode ipd_mode,
                                                   double alpha, uint64_t seed,
                                                   double tolerance) {
  constexpr int kSamples = 60;
  TopologyConfig topo = TopologyConfig::Miniature();
  topo.kind = kind;
  topo.ipd_mode = ipd_mode;
  topo.num_speakers = kind == ModelKind::kSpeakerBeam ? 3 : 0;
  topo.Normalize();
  Model model(topo, seed);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  AudioSignal mix;
  mix.channels = {Gaussian(kSamples, rng), Gaussian(kSamples, rng)};
  const ModelInput in = PrepareInput(mix, topo);
  const Tensor adapt = WaveformTensor(Gaussian(kSamples, rng));
  const Tensor ref1 = WaveformTensor(Gaussian(kSamples, rng));
  const Tensor ref2 = WaveformTensor(Gaussian(kSamples, rng));

  std::function<Tensor()> loss;
  if (kind == ModelKind::kTasNet) {
    loss = [&] {
      SeparateOutput o = model.Separate(in.waveform, in.ipd);
      return PitLoss(ref1, ref2, o.estimate1, o.estimate2).total;
    };
  } else {
    loss = [&] {
      ExtractOutput o = model.Extract(in.waveform, adapt, in.ipd);
      return MultitaskLoss(ref1, o.estimate, o.embedding,
                           model.speaker_projection(), 1, alpha)
          .total;
    };
  }

  std::vector<Tensor> leaves;
  for (auto &item : model.params().items()) leaves.push_back(item.second);
  const std::vector<double> errors =
      CheckGradientsPerLeaf(loss, leaves, kModelGradSteps);

  const std::string prefix = std::string(ModelKindName(kind)) + "/" +
                             std::string(IpdModeName(ipd_mode)) + "/a" +
                             std::to_string(static_cast<int>(alpha)) + "/";
  std::vector<GradCheckRecord> records;
  for (size_t i = 0; i < errors.size(); ++i)
    records.push_back({prefix + model.params().items()[i].first, errors[i],
                       errors[i] < tolerance});
  return records;
}

std::vector<GradCheckRecord> RunFullGradientSuite(uint64_t seed, int op_trials,
                                                  double tolerance) {
  std::vector<GradCheckRecord> all = RunOpGradientSuite(seed, op_trials, tolerance);
  auto append = [&](ModelKind kind, IpdMode ipd, double alpha) {
    auto recs = RunModelGradientCheck(kind, ipd, alpha, seed, tolerance);
    all.insert(all.end(), recs.begin(), recs.end());
  };
  for (IpdMode ipd : {IpdMode::kNone, IpdMode::kInput, IpdMode::kInternal})
    for (double alpha : {0.0, 10.0}) append(ModelKind::kSpeakerBeam, ipd, alpha);
  for (IpdMode ipd : {IpdMode::kNone, IpdMode::kInput}) append(ModelKind::kTasNet, ipd, 0.0);
  return all;
}

}  // namespace tdsb
