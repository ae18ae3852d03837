// tdsb/model/checkpoint.h

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

#ifndef TDSB_MODEL_CHECKPOINT_H_
#define TDSB_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tdsb/autodiff/tensor.h"
#include "tdsb/model/topology.h"
#include "tdsb/nn/layers.h"

namespace tdsb {

class Model;

inline constexpr char kCheckpointMagic[] = "TDSBCKPT";
inline constexpr uint32_t kCheckpointVersion = 1;

/// Named float64 array stored in a checkpoint.
struct CheckpointRecord {
  std::string name;
  Shape shape;
  std::vector<double> data;
};

/// Training bookkeeping saved next to the weights.
struct CheckpointMeta {
  double alpha = 0.0;
  int32_t epoch = 0;
  int64_t step = 0;
  double learning_rate = 0.0;
  double best_score = 0.0;       // best validation SiSNR (dB)
  int32_t epochs_since_best = 0;
  std::string rng_state;         // serialized std::mt19937_64
  std::vector<std::string> speakers;  // speaker-ID label order
};

/// On-disk layout (little-endian): 8-byte magic "TDSBCKPT", u32 version,
/// topology as i32 fields, metadata, then u32 record count followed by
/// (u32 name length, name bytes, u32 rank, u32 dims..., f64 data...) records.
/// Strings are u32-length-prefixed. save(load(f)) reproduces f byte for byte.
struct Checkpoint {
  TopologyConfig topology;
  CheckpointMeta meta;
  std::vector<CheckpointRecord> records;

  const CheckpointRecord *Find(const std::string &name) const;
};

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt);
/// Throws DataError on a missing file, bad magic, unsupported version or a
/// truncated/corrupt body.
Checkpoint LoadCheckpoint(const std::string &path);

/// Appends every parameter of `params` as a record named prefix + name.
void AppendParams(Checkpoint &ckpt, const ParamSet &params,
                  const std::string &prefix = "param/");
/// Copies records prefix + name into `params`; DataError on any missing
/// name or shape mismatch.
void RestoreParams(const Checkpoint &ckpt, ParamSet &params,
                   const std::string &prefix = "param/");

/// Checkpoint holding just a model's topology and weights.
Checkpoint MakeCheckpoint(const Model &model, const CheckpointMeta &meta = {});
/// Rebuilds the model stored in `ckpt` (weights from prefix "param/").
std::unique_ptr<Model> LoadModel(const Checkpoint &ckpt);

}  // namespace tdsb

#endif  // TDSB_MODEL_CHECKPOINT_H_
