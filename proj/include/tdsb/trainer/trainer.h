// tdsb/trainer/trainer.h

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

#ifndef TDSB_TRAINER_TRAINER_H_
#define TDSB_TRAINER_TRAINER_H_

#include <functional>
#include <string>
#include <vector>

#include "tdsb/corpus/corpus.h"
#include "tdsb/dsp/audio.h"
#include "tdsb/model/model.h"
#include "tdsb/trainer/config.h"

namespace tdsb {

/// One manifest line with its audio in memory.
struct TrainingExample {
  std::string mixture_id;
  PairType pair_type = PairType::kAB;
  AudioSignal mixture;
  std::vector<double> ref1;  // target
  std::vector<double> ref2;  // interferer
  std::vector<double> adaptation;
  int label = -1;            // index into the speaker list, -1 if unknown
};

/// Reads every file of `records`. DataError on unreadable files, mixed
/// sample rates, source/mixture length mismatch, or a mixture with fewer
/// channels than `topology` needs.
std::vector<TrainingExample> LoadExamples(const std::vector<MixtureRecord> &records,
                                          const TopologyConfig &topology,
                                          const std::vector<std::string> &speakers = {});

/// Sorted distinct target speakers: the speaker-ID label set.
std::vector<std::string> SpeakerLabels(const std::vector<MixtureRecord> &records);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double sisnr_db = 0.0;        // mean training-crop SiSNR
  double cross_entropy = 0.0;
};

struct TrainOptions {
  std::string out_path;           // best-validation checkpoint
  bool resume = false;            // continue from <out_path>.resume
  std::function<void(const EpochMetrics &)> on_epoch;  // progress hook
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  double best_score = 0.0;        // validation mean SiSNR (dB)
  int best_epoch = 0;
  std::vector<std::string> speakers;
};

/// Metrics log written next to the checkpoint.
std::string MetricsPath(const std::string &out_path);
/// Full training state used by TrainOptions::resume.
std::string ResumePath(const std::string &out_path);

/// Trains on the manifest's records. Writes the best-validation checkpoint
/// to `out_path` (with the speaker label list and alpha in its metadata),
/// the resumable state to ResumePath(out_path) after every epoch, and the
/// "epoch\tloss\tsisnr\tce" log to MetricsPath(out_path). NumericError,
/// naming the mixture, when a loss or parameter becomes non-finite.
TrainResult Train(const std::vector<MixtureRecord> &records, const TrainConfig &cfg,
                  const TrainOptions &options);

/// Mean SiSNR (dB) of the model's target estimate over full-length
/// examples; the better PIT assignment for the separation baseline.
double MeanSiSnr(const Model &model, const std::vector<TrainingExample> &examples);

/// Fraction of examples whose adaptation utterance the speaker-ID head
/// assigns to the right label (examples without a label are skipped).
double SpeakerAccuracy(const Model &model, const std::vector<TrainingExample> &examples);

}  // namespace tdsb

#endif  // TDSB_TRAINER_TRAINER_H_
