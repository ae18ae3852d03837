// tdsb/autodiff/ops.h

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

#ifndef TDSB_AUTODIFF_OPS_H_
#define TDSB_AUTODIFF_OPS_H_

#include <span>
#include <string_view>
#include <vector>

#include "tdsb/autodiff/tensor.h"

namespace tdsb {

/// Reduction axis meaning "all elements"; the result has shape {1}.
inline constexpr int kAllAxes = -1;

// Broadcasting, for add/sub/mul only: shapes are right-aligned and the
// shorter one is left-padded with 1s (leading batch dims). Each aligned pair
// of extents must be equal or one of them must be 1 (trailing singleton,
// e.g. [C,T] * [C,1]). Any other combination is a ShapeError.

Tensor Add(const Tensor &a, const Tensor &b);
Tensor Sub(const Tensor &a, const Tensor &b);
Tensor Mul(const Tensor &a, const Tensor &b);

/// [m,k] x [k,n] -> [m,n].
Tensor MatMul(const Tensor &a, const Tensor &b);

struct Conv1dOptions {
  int stride = 1;
  int dilation = 1;
  int groups = 1;
  int padding = 0;  // zeros on both ends
};

/// Cross-correlation (no kernel flip). x: [C_in, T],
/// w: [C_out, C_in / groups, K] -> [C_out, T_out] with
/// T_out = (T + 2*padding - dilation*(K-1) - 1) / stride + 1.
Tensor Conv1d(const Tensor &x, const Tensor &w, const Conv1dOptions &opts = {});

/// Overlap-add transposed convolution. x: [C_in, T], w: [C_in, C_out, K]
/// -> [C_out, (T-1)*stride + K].
Tensor Conv1dTranspose(const Tensor &x, const Tensor &w, int stride);

/// x where x >= 0, slope * x elsewhere. slope: [1] (shared) or [C] with
/// C == x.dim(0).
Tensor PRelu(const Tensor &x, const Tensor &slope);
Tensor Relu(const Tensor &x);
Tensor Sigmoid(const Tensor &x);
Tensor Exp(const Tensor &x);
Tensor Log(const Tensor &x);
Tensor Pow(const Tensor &x, double exponent);

/// Reductions keep the reduced axis with extent 1; kAllAxes gives {1}.
Tensor Sum(const Tensor &x, int axis = kAllAxes);
Tensor Mean(const Tensor &x, int axis = kAllAxes);

Tensor Concat(std::span<const Tensor> parts, int axis);
Tensor Slice(const Tensor &x, int axis, int begin, int end);
/// Gathers positions `indices` along `axis` (repeats allowed).
Tensor IndexSelect(const Tensor &x, int axis, std::span<const int> indices);

Tensor Softmax(const Tensor &x, int axis);
Tensor LogSoftmax(const Tensor &x, int axis);

/// Global layer norm over a [C, T] input: statistics over channels and
/// time jointly, then per-channel gain [C] and bias [C].
Tensor GlobalLayerNorm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                       double eps = 1e-8);

// Convenience wrappers built from the primitives above.
Tensor Scale(const Tensor &x, double factor);
Tensor AddScalar(const Tensor &x, double value);
Tensor Neg(const Tensor &x);
Tensor Dot(const Tensor &a, const Tensor &b);  // sum(a * b), shape {1}
/// Same elements (row-major order) under a new shape of equal size.
Tensor Reshape(const Tensor &x, const Shape &shape);

/// Attribute bag for the name-dispatched entry point.
struct OpAttrs {
  int axis = 0;
  int stride = 1;
  int dilation = 1;
  int groups = 1;
  int padding = 0;
  double exponent = 1.0;
  int begin = 0;
  int end = 0;
  std::vector<int> indices;
  double eps = 1e-8;
};

/// Applies an op by name ("add", "conv1d", "layer_norm_global", ...).
/// Throws UsageError for an unknown kind and ShapeError for bad arity.
Tensor Apply(std::string_view kind, std::span<const Tensor> inputs,
             const OpAttrs &attrs = {});

/// Every name accepted by Apply.
std::span<const std::string_view> OpKinds();

}  // namespace tdsb

#endif  // TDSB_AUTODIFF_OPS_H_
