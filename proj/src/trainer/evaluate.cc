// src/trainer/evaluate.cc

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

#include "tdsb/trainer/evaluate.h"

#include <memory>

#include "tdsb/dsp/wav.h"
#include "tdsb/loss/loss.h"
#include "tdsb/model/checkpoint.h"
#include "tdsb/util/error.h"

namespace tdsb {

RecordResult ScoreEstimate(const std::string &mixture_id, PairType pair_type,
                           std::span<const double> target,
                           std::span<const double> mixture,
                           std::span<const double> estimate) {
  RecordResult r;
  r.mixture_id = mixture_id;
  r.pair_type = pair_type;
  r.mixture_sisnr = SiSnrDb(target, mixture);
  r.output_sisnr = SiSnrDb(target, estimate);
  r.improvement = r.output_sisnr - r.mixture_sisnr;
  return r;
}

std::vector<RecordResult> EvaluateModel(const Model &model,
                                        const std::vector<MixtureRecord> &records,
                                        const EvaluateOptions &options) {
  if (records.empty()) throw DataError("evaluation manifest is empty");
  const TopologyConfig &topo = model.topology();
  const bool separation = topo.kind == ModelKind::kTasNet;
  if (separation && options.selection == SelectionMethod::kCosine) {
    if (!options.selector || options.selector->topology().kind != ModelKind::kSpeakerBeam)
      throw UsageError("cosine selection needs a trained td-spkbeam checkpoint (--aux)");
  }
  const bool needs_stereo =
      topo.kind != ModelKind::kPassthrough && topo.ipd_mode != IpdMode::kNone;

  NoGradGuard no_grad;
  std::vector<RecordResult> results;
  results.reserve(records.size());
  for (const auto &rec : records) {
    const AudioSignal mixture = ReadWav(rec.mixture_path);
    if (needs_stereo && mixture.num_channels() < 2)
      throw DataError("topology mismatch: checkpoint uses IPD (" +
                      std::string(IpdModeName(topo.ipd_mode)) + ") but " +
                      rec.mixture_path + " has " +
                      std::to_string(mixture.num_channels()) + " channel(s)");
    const std::vector<double> target = ReadWav(rec.src1_path).channel(0);
    const std::vector<double> adaptation = ReadWav(rec.adapt_path).channel(0);
    const ModelInput in = PrepareInput(mixture, topo);

    if (!separation) {
      Tensor est = model.Extract(in.waveform, WaveformTensor(adaptation), in.ipd).estimate;
      results.push_back(ScoreEstimate(rec.mixture_id, rec.pair_type, target,
                                      mixture.channel(0), est.data()));
      continue;
    }
    SeparateOutput s = model.Separate(in.waveform, in.ipd);
    const auto e1 = s.estimate1.data(), e2 = s.estimate2.data();
    const SelectionResult oracle = OracleSelect(e1, e2, target);
    const SelectionResult chosen = options.selection == SelectionMethod::kOracle
                                       ? oracle
                                       : CosineSelect(e1, e2, adaptation, *options.selector);
    RecordResult r = ScoreEstimate(rec.mixture_id, rec.pair_type, target, mixture.channel(0),
                                   chosen.chosen_index == 1 ? e1 : e2);
    r.chosen = chosen.chosen_index;
    r.oracle = oracle.chosen_index;
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<RecordResult> EvaluateCheckpoint(const std::string &ckpt_path,
                                             const std::string &manifest_path,
                                             SelectionMethod selection,
                                             const std::string &selector_path) {
  std::unique_ptr<Model> model = LoadModel(LoadCheckpoint(ckpt_path));
  std::unique_ptr<Model> selector;
  EvaluateOptions options;
  options.selection = selection;
  if (!selector_path.empty()) {
    selector = LoadModel(LoadCheckpoint(selector_path));
    options.selector = selector.get();
  }
  return EvaluateModel(*model, ReadManifest(manifest_path), options);
}

}  // namespace tdsb
