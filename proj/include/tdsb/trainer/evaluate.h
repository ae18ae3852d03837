// tdsb/trainer/evaluate.h

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

#ifndef TDSB_TRAINER_EVALUATE_H_
#define TDSB_TRAINER_EVALUATE_H_

#include <span>
#include <string>
#include <vector>

#include "tdsb/corpus/corpus.h"
#include "tdsb/eval/eval.h"
#include "tdsb/model/model.h"

namespace tdsb {

struct EvaluateOptions {
  SelectionMethod selection = SelectionMethod::kOracle;
  /// Extraction model whose auxiliary network embeds candidates for cosine
  /// selection; required for cosine selection of a separation model.
  const Model *selector = nullptr;
};

/// Scores one estimate: SiSNR of the estimate and of the unprocessed
/// mixture channel against the target, and their difference.
RecordResult ScoreEstimate(const std::string &mixture_id, PairType pair_type,
                           std::span<const double> target,
                           std::span<const double> mixture,
                           std::span<const double> estimate);

/// Runs `model` over every record. Extraction models use the record's
/// adaptation utterance; separation models pick one output per the
/// selection method. DataError (topology mismatch) when the model needs
/// more channels than the recordings have.
std::vector<RecordResult> EvaluateModel(const Model &model,
                                        const std::vector<MixtureRecord> &records,
                                        const EvaluateOptions &options = {});

/// Loads the checkpoint (and, for cosine selection, the selector checkpoint
/// at `selector_path`) and evaluates it on the manifest.
std::vector<RecordResult> EvaluateCheckpoint(const std::string &ckpt_path,
                                             const std::string &manifest_path,
                                             SelectionMethod selection,
                                             const std::string &selector_path = "");

}  // namespace tdsb

#endif  // TDSB_TRAINER_EVALUATE_H_
