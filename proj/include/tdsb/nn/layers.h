// tdsb/nn/layers.h

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

#ifndef TDSB_NN_LAYERS_H_
#define TDSB_NN_LAYERS_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tdsb/autodiff/tensor.h"

namespace tdsb {

/// Ordered name -> parameter map. Tensors are shared handles, so layers
/// holding a parameter see every in-place optimizer update.
class ParamSet {
 public:
  /// Registers a trainable tensor; throws UsageError on a duplicate name.
  Tensor &Add(const std::string &name, Tensor t);
  const Tensor &Get(const std::string &name) const;
  Tensor *Find(const std::string &name);
  const Tensor *Find(const std::string &name) const;

  using Item = std::pair<std::string, Tensor>;
  std::vector<Item> &items() { return items_; }
  const std::vector<Item> &items() const { return items_; }
  size_t size() const { return items_.size(); }
  int64_t NumScalars() const;

  void ZeroGrad();
  /// Copies values (not handles) from `other`; names and shapes must match.
  void CopyValuesFrom(const ParamSet &other);

 private:
  std::vector<Item> items_;
};

/// Weight initialization source: uniform(-k, k), k = 1/sqrt(fan_in).
class Initializer {
 public:
  explicit Initializer(uint64_t seed) : rng_(seed) {}
  Tensor Uniform(const Shape &shape, int fan_in);
  std::mt19937_64 &rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Pointwise (kernel 1) convolution with bias: [in, T] -> [out, T].
class Conv1x1 {
 public:
  Conv1x1() = default;
  Conv1x1(ParamSet &params, const std::string &name, int in, int out,
          Initializer &init);
  Tensor Forward(const Tensor &x) const;
  int in_channels() const { return weight_.dim(1); }
  int out_channels() const { return weight_.dim(0); }

 private:
  Tensor weight_;  // [out, in]
  Tensor bias_;    // [out, 1]
};

/// Learned analysis filterbank: conv1d with N filters of length L, stride
/// L/2, bias, ReLU. Output frames: (len - L) / (L/2) + 1.
class Encoder {
 public:
  Encoder() = default;
  Encoder(ParamSet &params, const std::string &name, int num_filters,
          int kernel, Initializer &init);
  /// y: [1, samples]. DataError when shorter than one kernel.
  Tensor Forward(const Tensor &y) const;
  static int NumFrames(int64_t num_samples, int kernel);

 private:
  Tensor weight_;  // [N, 1, L]
  Tensor bias_;    // [N, 1]
  int kernel_ = 0;
};

/// Overlap-add synthesis: transposed conv1d, kernel L, stride L/2, no
/// bias. [N, T] -> [1, (T-1)*L/2 + L].
class Decoder {
 public:
  Decoder() = default;
  Decoder(ParamSet &params, const std::string &name, int num_filters,
          int kernel, Initializer &init);
  Tensor Forward(const Tensor &m) const;

 private:
  Tensor weight_;  // [N, 1, L]
  int kernel_ = 0;
};

struct ConvBlockConfig {
  int in_channels = 0;      // B
  int hidden_channels = 0;  // H
  int kernel = 3;           // P, odd
  int dilation = 1;
};

/// Residual dilated depthwise-separable block:
/// 1x1 (B->H) -> PReLU -> gLN -> depthwise (P, dilation, same padding)
/// -> PReLU -> gLN -> 1x1 (H->B), added back onto the input.
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(ParamSet &params, const std::string &name,
            const ConvBlockConfig &cfg, Initializer &init);
  Tensor Forward(const Tensor &x) const;
  const ConvBlockConfig &config() const { return cfg_; }

 private:
  ConvBlockConfig cfg_;
  Conv1x1 in_;
  Tensor prelu1_, gain1_, shift1_;
  Tensor dw_weight_, dw_bias_;
  Tensor prelu2_, gain2_, shift2_;
  Conv1x1 out_;
};

/// Cross entropy of softmax(W e) against `label`: -log softmax(W e)[label].
/// e: [dim] or [dim, 1]; W: [S, dim]. DataError if label is out of range.
Tensor LinearSoftmaxCrossEntropy(const Tensor &e, const Tensor &w, int label);

/// Logits W e as plain numbers, for accuracy measurements.
std::vector<double> SpeakerLogits(const Tensor &e, const Tensor &w);

}  // namespace tdsb

#endif  // TDSB_NN_LAYERS_H_
