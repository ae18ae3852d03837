// tdsb/trainer/config.h

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

#ifndef TDSB_TRAINER_CONFIG_H_
#define TDSB_TRAINER_CONFIG_H_

#include <cstdint>
#include <string>

#include "tdsb/model/topology.h"

namespace tdsb {

/// Everything a training run depends on besides the data.
struct TrainConfig {
  TopologyConfig topology;
  double alpha = 10.0;
  double lr = 1e-3;
  int max_epochs = 40;
  int batch_size = 4;
  double clip_norm = 5.0;   // global gradient-norm bound; 0 disables
  uint64_t seed = 0;
  double segment_s = 1.0;   // random crop length of mixtures and references
  int eval_every = 1;       // validate every this many epochs
  double valid_fraction = 0.1;
  int lr_patience = 3;      // validations without improvement before decay
  double lr_decay = 0.5;

  /// Crop length in samples at `sample_rate`.
  int64_t SegmentSamples(int sample_rate) const;
  /// UsageError naming the first violated constraint.
  void Validate(int sample_rate) const;
};

/// Parses `key = value` lines ('#' starts a comment). Keys: model, ipd,
/// preset, N, L, B, H, P, X, R, stft_frame, stft_hop, alpha, lr,
/// max_epochs, batch_size, clip_norm, seed, segment_s, eval_every,
/// valid_fraction, lr_patience, lr_decay. A preset is applied before the
/// individual topology keys regardless of line order. Unknown or repeated
/// keys and malformed values raise UsageError as "<source>:<line>: ...".
TrainConfig ParseTrainConfig(const std::string &text,
                             const std::string &source = "config");
/// Reads and parses a config file; DataError if it cannot be read.
TrainConfig LoadTrainConfig(const std::string &path);

}  // namespace tdsb

#endif  // TDSB_TRAINER_CONFIG_H_
