// src/nn/layers.cc

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

#include "tdsb/nn/layers.h"

#include <algorithm>
#include <cmath>

#include "tdsb/autodiff/ops.h"
#include "tdsb/util/error.h"

namespace tdsb {

Tensor &ParamSet::Add(const std::string &name, Tensor t) {
  if (Find(name)) throw UsageError("duplicate parameter name '" + name + "'");
  t.set_requires_grad(true);
  items_.emplace_back(name, std::move(t));
  return items_.back().second;
}

const Tensor &ParamSet::Get(const std::string &name) const {
  const Tensor *t = Find(name);
  if (!t) throw UsageError("no parameter named '" + name + "'");
  return *t;
}

Tensor *ParamSet::Find(const std::string &name) {
  for (auto &[n, t] : items_)
    if (n == name) return &t;
  return nullptr;
}

const Tensor *ParamSet::Find(const std::string &name) const {
  for (const auto &[n, t] : items_)
    if (n == name) return &t;
  return nullptr;
}

int64_t ParamSet::NumScalars() const {
  int64_t n = 0;
  for (const auto &item : items_) n += item.second.size();
  return n;
}

void ParamSet::ZeroGrad() {
  for (auto &item : items_) item.second.ZeroGrad();
}

void ParamSet::CopyValuesFrom(const ParamSet &other) {
  if (other.size() != size())
    throw DataError("parameter count mismatch: " + std::to_string(size()) +
                    " vs " + std::to_string(other.size()));
  for (auto &[name, t] : items_) {
    const Tensor *src = other.Find(name);
    if (!src) throw DataError("missing parameter '" + name + "'");
    if (src->shape() != t.shape())
      throw DataError("parameter '" + name + "' has shape " +
                      ShapeString(src->shape()) + ", expected " +
                      ShapeString(t.shape()));
    std::copy(src->data().begin(), src->data().end(), t.mutable_data().begin());
  }
}

Tensor Initializer::Uniform(const Shape &shape, int fan_in) {
  const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-k, k);
  std::vector<double> v(NumElements(shape));
  for (double &x : v) x = u(rng_);
  return Tensor::FromData(shape, std::move(v), true);
}

Conv1x1::Conv1x1(ParamSet &params, const std::string &name, int in, int out,
                 Initializer &init)
    : weight_(params.Add(name + ".weight", init.Uniform({out, in}, in))),
      bias_(params.Add(name + ".bias", Tensor::Zeros({out, 1}))) {}

Tensor Conv1x1::Forward(const Tensor &x) const {
  return Add(MatMul(weight_, x), bias_);
}

Encoder::Encoder(ParamSet &params, const std::string &name, int num_filters,
                 int kernel, Initializer &init)
    : weight_(params.Add(name + ".weight",
                         init.Uniform({num_filters, 1, kernel}, kernel))),
      bias_(params.Add(name + ".bias", Tensor::Zeros({num_filters, 1}))),
      kernel_(kernel) {
  if (kernel < 2 || kernel % 2)
    throw UsageError("encoder kernel must be even and >= 2");
}

int Encoder::NumFrames(int64_t num_samples, int kernel) {
  if (num_samples < kernel) return 0;
  return static_cast<int>((num_samples - kernel) / (kernel / 2)) + 1;
}

Tensor Encoder::Forward(const Tensor &y) const {
  if (y.rank() != 2 || y.dim(0) != 1)
    throw ShapeError("encoder expects a [1, samples] waveform, got " +
                     ShapeString(y.shape()));
  if (y.dim(1) < kernel_)
    throw DataError("encoder input of " + std::to_string(y.dim(1)) +
                    " samples is shorter than the window (" +
                    std::to_string(kernel_) + ")");
  return Relu(Add(Conv1d(y, weight_, {.stride = kernel_ / 2}), bias_));
}

Decoder::Decoder(ParamSet &params, const std::string &name, int num_filters,
                 int kernel, Initializer &init)
    : weight_(params.Add(name + ".weight",
                         init.Uniform({num_filters, 1, kernel}, num_filters))),
      kernel_(kernel) {}

Tensor Decoder::Forward(const Tensor &m) const {
  if (m.rank() != 2 || m.dim(0) != weight_.dim(0))
    throw ShapeError("decoder expects [" + std::to_string(weight_.dim(0)) +
                     ", T], got " + ShapeString(m.shape()));
  return Conv1dTranspose(m, weight_, kernel_ / 2);
}

ConvBlock::ConvBlock(ParamSet &params, const std::string &name,
                     const ConvBlockConfig &cfg, Initializer &init)
    : cfg_(cfg) {
  if (cfg.in_channels < 1 || cfg.hidden_channels < 1 || cfg.dilation < 1 ||
      cfg.kernel < 1 || cfg.kernel % 2 == 0)
    throw UsageError("conv block needs positive sizes and an odd kernel");
  const int h = cfg.hidden_channels;
  in_ = Conv1x1(params, name + ".in", cfg.in_channels, h, init);
  prelu1_ = params.Add(name + ".prelu1", Tensor::Full({1}, 0.25));
  gain1_ = params.Add(name + ".norm1.gain", Tensor::Full({h}, 1.0));
  shift1_ = params.Add(name + ".norm1.bias", Tensor::Zeros({h}));
  dw_weight_ = params.Add(name + ".depthwise.weight",
                          init.Uniform({h, 1, cfg.kernel}, cfg.kernel));
  dw_bias_ = params.Add(name + ".depthwise.bias", Tensor::Zeros({h, 1}));
  prelu2_ = params.Add(name + ".prelu2", Tensor::Full({1}, 0.25));
  gain2_ = params.Add(name + ".norm2.gain", Tensor::Full({h}, 1.0));
  shift2_ = params.Add(name + ".norm2.bias", Tensor::Zeros({h}));
  out_ = Conv1x1(params, name + ".out", h, cfg.in_channels, init);
}

Tensor ConvBlock::Forward(const Tensor &x) const {
  if (x.rank() != 2 || x.dim(0) != cfg_.in_channels)
    throw ShapeError("conv block expects [" + std::to_string(cfg_.in_channels) +
                     ", T], got " + ShapeString(x.shape()));
  Tensor h = GlobalLayerNorm(PRelu(in_.Forward(x), prelu1_), gain1_, shift1_);
  h = Add(Conv1d(h, dw_weight_,
                 {.dilation = cfg_.dilation,
                  .groups = cfg_.hidden_channels,
                  .padding = cfg_.dilation * (cfg_.kernel - 1) / 2}),
          dw_bias_);
  h = GlobalLayerNorm(PRelu(h, prelu2_), gain2_, shift2_);
  return Add(x, out_.Forward(h));
}

Tensor LinearSoftmaxCrossEntropy(const Tensor &e, const Tensor &w, int label) {
  if (w.rank() != 2) throw ShapeError("speaker projection must be [S, dim]");
  const int speakers = w.dim(0);
  if (label < 0 || label >= speakers)
    throw DataError("speaker label " + std::to_string(label) +
                    " out of range [0, " + std::to_string(speakers) + ")");
  Tensor logits;  // [S, 1]
  if (e.rank() == 2 && e.dim(1) == 1 && e.dim(0) == w.dim(1)) {
    logits = MatMul(w, e);
  } else if (e.rank() == 1 && e.dim(0) == w.dim(1)) {
    logits = Sum(Mul(w, e), 1);
  } else {
    throw ShapeError("embedding of shape " + ShapeString(e.shape()) +
                     " does not match projection " + ShapeString(w.shape()));
  }
  Tensor log_probs = LogSoftmax(logits, 0);
  return Neg(Sum(Slice(log_probs, 0, label, label + 1)));
}

std::vector<double> SpeakerLogits(const Tensor &e, const Tensor &w) {
  const int s = w.dim(0), d = w.dim(1);
  if (e.size() != d)
    throw ShapeError("embedding size does not match projection width");
  std::vector<double> out(s, 0.0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < d; ++j) out[i] += w.data()[i * d + j] * e.data()[j];
  return out;
}

}  // namespace tdsb
