// src/autodiff/ops.cc

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

#include "tdsb/autodiff/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "tdsb/util/error.h"

namespace tdsb {

using internal::Node;
using internal::Record;

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void ShapeFail(const std::string &op, const Shape &a,
                            const Shape &b) {
  throw ShapeError(op + ": incompatible shapes " + ShapeString(a) + " and " +
                   ShapeString(b));
}

void RequireRank(const char *op, const Tensor &x, int rank) {
  if (x.rank() != rank)
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     ShapeString(x.shape()));
}

int NormalizeAxis(const char *op, int axis, int rank) {
  int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank)
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for rank " + std::to_string(rank));
  return a;
}

// outer x n x inner decomposition of a shape around `axis`.
struct AxisSplit {
  int64_t outer = 1, n = 1, inner = 1;
};

AxisSplit SplitAt(const Shape &s, int axis) {
  AxisSplit r;
  for (int i = 0; i < axis; ++i) r.outer *= s[i];
  r.n = s[axis];
  for (size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

// ----- broadcasting -----

// Broadcast plan: output shape plus, per operand, the element stride of
// every output dimension (0 where the operand is broadcast).
struct Broadcast {
  Shape out;
  std::vector<int64_t> sa, sb;
  bool same = false;  // both operands already have the output shape
};

std::vector<int64_t> BroadcastStrides(const Shape &in, const Shape &out) {
  const int rank = static_cast<int>(out.size());
  const int offset = rank - static_cast<int>(in.size());
  std::vector<int64_t> stride(rank, 0);
  int64_t s = 1;
  for (int i = rank - 1; i >= offset; --i) {
    const int d = in[i - offset];
    stride[i] = d == 1 ? 0 : s;
    s *= d;
  }
  return stride;
}

Broadcast PlanBroadcast(const char *op, const Shape &a, const Shape &b) {
  Broadcast p;
  if (a == b) {
    p.out = a;
    p.same = true;
    return p;
  }
  const size_t rank = std::max(a.size(), b.size());
  p.out.assign(rank, 1);
  for (size_t i = 0; i < rank; ++i) {
    const int da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const int db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) ShapeFail(op, a, b);
    p.out[i] = std::max(da, db);
  }
  p.sa = BroadcastStrides(a, p.out);
  p.sb = BroadcastStrides(b, p.out);
  return p;
}

// Calls f(out_index, a_index, b_index) for every output element, walking
// the innermost dimension in a tight loop.
template <class F>
void ForEachBroadcast(const Broadcast &p, F &&f) {
  const int64_t n = NumElements(p.out);
  if (p.same) {
    for (int64_t i = 0; i < n; ++i) f(i, i, i);
    return;
  }
  const int rank = static_cast<int>(p.out.size());
  const int64_t inner = p.out.back();
  const int64_t sa = p.sa.back(), sb = p.sb.back();
  std::vector<int> counter(rank, 0);
  int64_t oa = 0, ob = 0;
  for (int64_t o = 0; o < n; o += inner) {
    for (int64_t j = 0; j < inner; ++j) f(o + j, oa + j * sa, ob + j * sb);
    for (int i = rank - 2; i >= 0; --i) {
      ++counter[i];
      oa += p.sa[i];
      ob += p.sb[i];
      if (counter[i] < p.out[i]) break;
      oa -= p.sa[i] * counter[i];
      ob -= p.sb[i] * counter[i];
      counter[i] = 0;
    }
  }
}

enum class BinKind { kAdd, kSub, kMul };

template <BinKind kind>
Tensor BinaryImpl(const char *op, const Tensor &a, const Tensor &b) {
  auto plan = std::make_shared<Broadcast>(PlanBroadcast(op, a.shape(), b.shape()));
  std::vector<double> out(NumElements(plan->out));
  const double *da = a.data().data();
  const double *db = b.data().data();
  double *o = out.data();
  ForEachBroadcast(*plan, [&](int64_t i, int64_t ia, int64_t ib) {
    if constexpr (kind == BinKind::kAdd) o[i] = da[ia] + db[ib];
    if constexpr (kind == BinKind::kSub) o[i] = da[ia] - db[ib];
    if constexpr (kind == BinKind::kMul) o[i] = da[ia] * db[ib];
  });
  return Record(op, plan->out, std::move(out), {a, b}, [plan](Node &self) {
    Node &na = *self.inputs[0];
    Node &nb = *self.inputs[1];
    const double *g = self.grad.data();
    if (na.requires_grad) {
      double *ga = na.EnsureGrad().data();
      const double *vb = nb.data.data();
      ForEachBroadcast(*plan, [&](int64_t i, int64_t ia, int64_t ib) {
        if constexpr (kind == BinKind::kMul)
          ga[ia] += g[i] * vb[ib];
        else
          ga[ia] += g[i];
      });
    }
    if (nb.requires_grad) {
      double *gb = nb.EnsureGrad().data();
      const double *va = na.data.data();
      ForEachBroadcast(*plan, [&](int64_t i, int64_t ia, int64_t ib) {
        if constexpr (kind == BinKind::kMul) gb[ib] += g[i] * va[ia];
        if constexpr (kind == BinKind::kSub) gb[ib] -= g[i];
        if constexpr (kind == BinKind::kAdd) gb[ib] += g[i];
      });
    }
  });
}

// Elementwise unary op; `deriv(x, y)` gives dy/dx from input and output.
template <class F, class D>
Tensor Unary(const char *op, const Tensor &x, F f, D deriv) {
  std::vector<double> out(x.size());
  auto dx = x.data();
  for (int64_t i = 0; i < x.size(); ++i) out[i] = f(dx[i]);
  return Record(op, x.shape(), std::move(out), {x}, [deriv](Node &self) {
    Node &in = *self.inputs[0];
    auto &g = in.EnsureGrad();
    for (size_t i = 0; i < g.size(); ++i)
      g[i] += self.grad[i] * deriv(in.data[i], self.data[i]);
  });
}

// ----- conv helpers -----

struct ConvGeom {
  int c_in, c_out, k, t_in, t_out, groups, cin_g, cout_g;
  Conv1dOptions o;
};

// col[(ci*K + k), t] = x[c0 + ci, t*stride + k*dilation - padding]
void Im2Col(const double *x, const ConvGeom &g, int c0, double *col) {
  for (int ci = 0; ci < g.cin_g; ++ci) {
    const double *row = x + static_cast<int64_t>(c0 + ci) * g.t_in;
    for (int k = 0; k < g.k; ++k) {
      double *dst = col + static_cast<int64_t>(ci * g.k + k) * g.t_out;
      const int shift = k * g.o.dilation - g.o.padding;
      for (int t = 0; t < g.t_out; ++t) {
        const int src = t * g.o.stride + shift;
        dst[t] = (src >= 0 && src < g.t_in) ? row[src] : 0.0;
      }
    }
  }
}

void Col2ImAdd(const double *col, const ConvGeom &g, int c0, double *dx) {
  for (int ci = 0; ci < g.cin_g; ++ci) {
    double *row = dx + static_cast<int64_t>(c0 + ci) * g.t_in;
    for (int k = 0; k < g.k; ++k) {
      const double *src_col = col + static_cast<int64_t>(ci * g.k + k) * g.t_out;
      const int shift = k * g.o.dilation - g.o.padding;
      for (int t = 0; t < g.t_out; ++t) {
        const int dst = t * g.o.stride + shift;
        if (dst >= 0 && dst < g.t_in) row[dst] += src_col[t];
      }
    }
  }
}

}  // namespace

Tensor Add(const Tensor &a, const Tensor &b) {
  return BinaryImpl<BinKind::kAdd>("add", a, b);
}
Tensor Sub(const Tensor &a, const Tensor &b) {
  return BinaryImpl<BinKind::kSub>("sub", a, b);
}
Tensor Mul(const Tensor &a, const Tensor &b) {
  return BinaryImpl<BinKind::kMul>("mul", a, b);
}

Tensor MatMul(const Tensor &a, const Tensor &b) {
  RequireRank("matmul", a, 2);
  RequireRank("matmul", b, 2);
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) ShapeFail("matmul", a.shape(), b.shape());
  std::vector<double> out(static_cast<int64_t>(m) * n);
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  return Record("matmul", {m, n}, std::move(out), {a, b},
                [m, k, n](Node &self) {
                  Node &na = *self.inputs[0];
                  Node &nb = *self.inputs[1];
                  ConstMap g(self.grad.data(), m, n);
                  if (na.requires_grad)
                    MutMap(na.EnsureGrad().data(), m, k).noalias() +=
                        g * ConstMap(nb.data.data(), k, n).transpose();
                  if (nb.requires_grad)
                    MutMap(nb.EnsureGrad().data(), k, n).noalias() +=
                        ConstMap(na.data.data(), m, k).transpose() * g;
                });
}

Tensor Conv1d(const Tensor &x, const Tensor &w, const Conv1dOptions &opts) {
  RequireRank("conv1d", x, 2);
  RequireRank("conv1d", w, 3);
  if (opts.stride < 1 || opts.dilation < 1 || opts.groups < 1 ||
      opts.padding < 0)
    throw ShapeError("conv1d: stride, dilation, groups must be >= 1 and "
                     "padding >= 0");
  ConvGeom g{};
  g.o = opts;
  g.c_in = x.dim(0);
  g.t_in = x.dim(1);
  g.c_out = w.dim(0);
  g.k = w.dim(2);
  g.groups = opts.groups;
  if (g.c_in % g.groups || g.c_out % g.groups || w.dim(1) != g.c_in / g.groups)
    ShapeFail("conv1d", x.shape(), w.shape());
  g.cin_g = g.c_in / g.groups;
  g.cout_g = g.c_out / g.groups;
  const int span = opts.dilation * (g.k - 1) + 1;
  if (g.t_in + 2 * opts.padding < span)
    throw ShapeError("conv1d: input length " + std::to_string(g.t_in) +
                     " shorter than kernel span " + std::to_string(span));
  g.t_out = (g.t_in + 2 * opts.padding - span) / opts.stride + 1;

  std::vector<double> out(static_cast<int64_t>(g.c_out) * g.t_out, 0.0);
  const double *xd = x.data().data();
  const double *wd = w.data().data();
  const bool depthwise = g.cin_g == 1 && g.cout_g == 1;
  if (depthwise) {
    for (int c = 0; c < g.c_out; ++c) {
      const double *row = xd + static_cast<int64_t>(c) * g.t_in;
      double *dst = out.data() + static_cast<int64_t>(c) * g.t_out;
      for (int k = 0; k < g.k; ++k) {
        const double wk = wd[c * g.k + k];
        const int shift = k * opts.dilation - opts.padding;
        for (int t = 0; t < g.t_out; ++t) {
          const int src = t * opts.stride + shift;
          if (src >= 0 && src < g.t_in) dst[t] += wk * row[src];
        }
      }
    }
  } else {
    std::vector<double> col(static_cast<int64_t>(g.cin_g) * g.k * g.t_out);
    for (int gi = 0; gi < g.groups; ++gi) {
      Im2Col(xd, g, gi * g.cin_g, col.data());
      MutMap(out.data() + static_cast<int64_t>(gi) * g.cout_g * g.t_out,
             g.cout_g, g.t_out)
          .noalias() =
          ConstMap(wd + static_cast<int64_t>(gi) * g.cout_g * g.cin_g * g.k,
                   g.cout_g, g.cin_g * g.k) *
          ConstMap(col.data(), g.cin_g * g.k, g.t_out);
    }
  }

  return Record(
      "conv1d", {g.c_out, g.t_out}, std::move(out), {x, w},
      [g, depthwise](Node &self) {
        Node &nx = *self.inputs[0];
        Node &nw = *self.inputs[1];
        const double *gd = self.grad.data();
        if (depthwise) {
          double *gx = nx.requires_grad ? nx.EnsureGrad().data() : nullptr;
          double *gw = nw.requires_grad ? nw.EnsureGrad().data() : nullptr;
          for (int c = 0; c < g.c_out; ++c) {
            const double *row = nx.data.data() + static_cast<int64_t>(c) * g.t_in;
            const double *go = gd + static_cast<int64_t>(c) * g.t_out;
            for (int k = 0; k < g.k; ++k) {
              const double wk = nw.data[c * g.k + k];
              const int shift = k * g.o.dilation - g.o.padding;
              double acc = 0.0;
              for (int t = 0; t < g.t_out; ++t) {
                const int src = t * g.o.stride + shift;
                if (src < 0 || src >= g.t_in) continue;
                acc += go[t] * row[src];
                if (gx) gx[static_cast<int64_t>(c) * g.t_in + src] += go[t] * wk;
              }
              if (gw) gw[c * g.k + k] += acc;
            }
          }
          return;
        }
        const int rows = g.cin_g * g.k;
        std::vector<double> col(static_cast<int64_t>(rows) * g.t_out);
        std::vector<double> dcol;
        for (int gi = 0; gi < g.groups; ++gi) {
          ConstMap go(gd + static_cast<int64_t>(gi) * g.cout_g * g.t_out,
                      g.cout_g, g.t_out);
          const int64_t woff = static_cast<int64_t>(gi) * g.cout_g * rows;
          if (nw.requires_grad) {
            Im2Col(nx.data.data(), g, gi * g.cin_g, col.data());
            MutMap(nw.EnsureGrad().data() + woff, g.cout_g, rows).noalias() +=
                go * ConstMap(col.data(), rows, g.t_out).transpose();
          }
          if (nx.requires_grad) {
            dcol.resize(col.size());
            MutMap(dcol.data(), rows, g.t_out).noalias() =
                ConstMap(nw.data.data() + woff, g.cout_g, rows).transpose() * go;
            Col2ImAdd(dcol.data(), g, gi * g.cin_g, nx.EnsureGrad().data());
          }
        }
      });
}

Tensor Conv1dTranspose(const Tensor &x, const Tensor &w, int stride) {
  RequireRank("conv1d_transpose", x, 2);
  RequireRank("conv1d_transpose", w, 3);
  if (stride < 1) throw ShapeError("conv1d_transpose: stride must be >= 1");
  const int c_in = x.dim(0), t_in = x.dim(1);
  if (w.dim(0) != c_in) ShapeFail("conv1d_transpose", x.shape(), w.shape());
  const int c_out = w.dim(1), k = w.dim(2);
  const int t_out = (t_in - 1) * stride + k;
  const int rows = c_out * k;

  std::vector<double> cols(static_cast<int64_t>(rows) * t_in);
  MutMap(cols.data(), rows, t_in).noalias() =
      ConstMap(w.data().data(), c_in, rows).transpose() *
      ConstMap(x.data().data(), c_in, t_in);
  std::vector<double> out(static_cast<int64_t>(c_out) * t_out, 0.0);
  for (int co = 0; co < c_out; ++co)
    for (int kk = 0; kk < k; ++kk) {
      const double *src = cols.data() + static_cast<int64_t>(co * k + kk) * t_in;
      double *dst = out.data() + static_cast<int64_t>(co) * t_out + kk;
      for (int t = 0; t < t_in; ++t) dst[static_cast<int64_t>(t) * stride] += src[t];
    }

  return Record("conv1d_transpose", {c_out, t_out}, std::move(out), {x, w},
                [=](Node &self) {
                  Node &nx = *self.inputs[0];
                  Node &nw = *self.inputs[1];
                  std::vector<double> dcols(static_cast<int64_t>(rows) * t_in);
                  for (int co = 0; co < c_out; ++co)
                    for (int kk = 0; kk < k; ++kk) {
                      double *dst = dcols.data() +
                                    static_cast<int64_t>(co * k + kk) * t_in;
                      const double *src = self.grad.data() +
                                          static_cast<int64_t>(co) * t_out + kk;
                      for (int t = 0; t < t_in; ++t)
                        dst[t] = src[static_cast<int64_t>(t) * stride];
                    }
                  ConstMap dc(dcols.data(), rows, t_in);
                  if (nx.requires_grad)
                    MutMap(nx.EnsureGrad().data(), c_in, t_in).noalias() +=
                        ConstMap(nw.data.data(), c_in, rows) * dc;
                  if (nw.requires_grad)
                    MutMap(nw.EnsureGrad().data(), c_in, rows).noalias() +=
                        ConstMap(nx.data.data(), c_in, t_in) * dc.transpose();
                });
}

Tensor PRelu(const Tensor &x, const Tensor &slope) {
  if (x.rank() < 1 || slope.rank() != 1 ||
      (slope.dim(0) != 1 && slope.dim(0) != x.dim(0)))
    ShapeFail("prelu", x.shape(), slope.shape());
  const int64_t inner = x.size() / x.dim(0);
  const bool shared = slope.dim(0) == 1;
  std::vector<double> out(x.size());
  auto xd = x.data();
  auto ad = slope.data();
  const int64_t rows = x.size() / inner;
  for (int64_t r = 0; r < rows; ++r) {
    const double a = ad[shared ? 0 : r];
    for (int64_t i = r * inner; i < (r + 1) * inner; ++i)
      out[i] = xd[i] >= 0.0 ? xd[i] : a * xd[i];
  }
  return Record("prelu", x.shape(), std::move(out), {x, slope},
                [inner, rows, shared](Node &self) {
                  Node &nx = *self.inputs[0];
                  Node &na = *self.inputs[1];
                  const double *g = self.grad.data();
                  const double *v = nx.data.data();
                  double *gx = nx.requires_grad ? nx.EnsureGrad().data() : nullptr;
                  double *ga = na.requires_grad ? na.EnsureGrad().data() : nullptr;
                  for (int64_t r = 0; r < rows; ++r) {
                    const int64_t c = shared ? 0 : r;
                    const double a = na.data[c];
                    double da = 0.0;
                    for (int64_t i = r * inner; i < (r + 1) * inner; ++i) {
                      if (v[i] >= 0.0) {
                        if (gx) gx[i] += g[i];
                      } else {
                        if (gx) gx[i] += g[i] * a;
                        da += g[i] * v[i];
                      }
                    }
                    if (ga) ga[c] += da;
                  }
                });
}

Tensor Relu(const Tensor &x) {
  return Unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor Sigmoid(const Tensor &x) {
  return Unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor Exp(const Tensor &x) {
  return Unary(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor Log(const Tensor &x) {
  return Unary(
      "log", x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor Pow(const Tensor &x, double exponent) {
  return Unary(
      "power", x, [exponent](double v) { return std::pow(v, exponent); },
      [exponent](double v, double) {
        return exponent * std::pow(v, exponent - 1.0);
      });
}

Tensor Sum(const Tensor &x, int axis) {
  if (axis == kAllAxes) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    return Record("sum", {1}, {s}, {x}, [](Node &self) {
      Node &in = *self.inputs[0];
      for (double &g : in.EnsureGrad()) g += self.grad[0];
    });
  }
  const int a = NormalizeAxis("sum", axis, x.rank());
  const AxisSplit sp = SplitAt(x.shape(), a);
  Shape out_shape = x.shape();
  out_shape[a] = 1;
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  auto xd = x.data();
  for (int64_t o = 0; o < sp.outer; ++o)
    for (int64_t j = 0; j < sp.n; ++j)
      for (int64_t i = 0; i < sp.inner; ++i)
        out[o * sp.inner + i] += xd[(o * sp.n + j) * sp.inner + i];
  return Record("sum", out_shape, std::move(out), {x}, [sp](Node &self) {
    auto &g = self.inputs[0]->EnsureGrad();
    for (int64_t o = 0; o < sp.outer; ++o)
      for (int64_t j = 0; j < sp.n; ++j)
        for (int64_t i = 0; i < sp.inner; ++i)
          g[(o * sp.n + j) * sp.inner + i] += self.grad[o * sp.inner + i];
  });
}

Tensor Mean(const Tensor &x, int axis) {
  const double count =
      axis == kAllAxes
          ? static_cast<double>(x.size())
          : static_cast<double>(x.dim(NormalizeAxis("mean", axis, x.rank())));
  const Tensor s = Sum(x, axis);
  std::vector<double> out(s.data().begin(), s.data().end());
  for (double &v : out) v /= count;
  return Record("mean", s.shape(), std::move(out), {s}, [count](Node &self) {
    auto &g = self.inputs[0]->EnsureGrad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / count;
  });
}

Tensor Concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const int a = NormalizeAxis("concat", axis, parts[0].rank());
  Shape out_shape = parts[0].shape();
  int total = 0;
  for (const Tensor &p : parts) {
    Shape s = p.shape();
    if (static_cast<int>(s.size()) != parts[0].rank())
      ShapeFail("concat", parts[0].shape(), s);
    s[a] = out_shape[a];
    if (s != out_shape) ShapeFail("concat", parts[0].shape(), p.shape());
    total += p.dim(a);
  }
  out_shape[a] = total;
  const AxisSplit sp = SplitAt(out_shape, a);
  std::vector<double> out(NumElements(out_shape));
  std::vector<int> offsets;
  int off = 0;
  for (const Tensor &p : parts) {
    offsets.push_back(off);
    const int64_t width = static_cast<int64_t>(p.dim(a)) * sp.inner;
    auto pd = p.data();
    for (int64_t o = 0; o < sp.outer; ++o)
      std::copy_n(pd.data() + o * width, width,
                  out.data() + (o * sp.n + off) * sp.inner);
    off += p.dim(a);
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return Record("concat", out_shape, std::move(out), std::move(inputs),
                [sp, offsets, a](Node &self) {
                  for (size_t pi = 0; pi < self.inputs.size(); ++pi) {
                    Node &in = *self.inputs[pi];
                    if (!in.requires_grad) continue;
                    auto &g = in.EnsureGrad();
                    const int64_t width =
                        static_cast<int64_t>(in.shape[a]) * sp.inner;
                    for (int64_t o = 0; o < sp.outer; ++o) {
                      const double *src =
                          self.grad.data() + (o * sp.n + offsets[pi]) * sp.inner;
                      double *dst = g.data() + o * width;
                      for (int64_t i = 0; i < width; ++i) dst[i] += src[i];
                    }
                  }
                });
}

Tensor Slice(const Tensor &x, int axis, int begin, int end) {
  const int a = NormalizeAxis("slice", axis, x.rank());
  if (begin < 0 || end > x.dim(a) || begin >= end)
    throw ShapeError("slice: range [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") invalid for shape " +
                     ShapeString(x.shape()));
  std::vector<int> idx(end - begin);
  for (int i = begin; i < end; ++i) idx[i - begin] = i;
  return IndexSelect(x, a, idx);
}

Tensor IndexSelect(const Tensor &x, int axis, std::span<const int> indices) {
  const int a = NormalizeAxis("index_select", axis, x.rank());
  if (indices.empty()) throw ShapeError("index_select: empty index list");
  for (int i : indices)
    if (i < 0 || i >= x.dim(a))
      throw ShapeError("index_select: index " + std::to_string(i) +
                       " out of range for shape " + ShapeString(x.shape()));
  const AxisSplit sp = SplitAt(x.shape(), a);
  Shape out_shape = x.shape();
  out_shape[a] = static_cast<int>(indices.size());
  const int64_t m = static_cast<int64_t>(indices.size());
  std::vector<double> out(sp.outer * m * sp.inner);
  auto xd = x.data();
  for (int64_t o = 0; o < sp.outer; ++o)
    for (int64_t j = 0; j < m; ++j)
      std::copy_n(xd.data() + (o * sp.n + indices[j]) * sp.inner, sp.inner,
                  out.data() + (o * m + j) * sp.inner);
  std::vector<int> idx(indices.begin(), indices.end());
  return Record("index_select", out_shape, std::move(out), {x},
                [sp, idx](Node &self) {
                  auto &g = self.inputs[0]->EnsureGrad();
                  const int64_t m = static_cast<int64_t>(idx.size());
                  for (int64_t o = 0; o < sp.outer; ++o)
                    for (int64_t j = 0; j < m; ++j) {
                      const double *src = self.grad.data() + (o * m + j) * sp.inner;
                      double *dst = g.data() + (o * sp.n + idx[j]) * sp.inner;
                      for (int64_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
                    }
                });
}

namespace {

Tensor SoftmaxImpl(const Tensor &x, int axis, bool log_space) {
  const char *op = log_space ? "log_softmax" : "softmax";
  const int a = NormalizeAxis(op, axis, x.rank());
  const AxisSplit sp = SplitAt(x.shape(), a);
  std::vector<double> out(x.size());
  auto xd = x.data();
  for (int64_t o = 0; o < sp.outer; ++o)
    for (int64_t i = 0; i < sp.inner; ++i) {
      auto at = [&](int64_t j) { return (o * sp.n + j) * sp.inner + i; };
      double mx = xd[at(0)];
      for (int64_t j = 1; j < sp.n; ++j) mx = std::max(mx, xd[at(j)]);
      double z = 0.0;
      for (int64_t j = 0; j < sp.n; ++j) z += std::exp(xd[at(j)] - mx);
      const double log_z = std::log(z);
      for (int64_t j = 0; j < sp.n; ++j)
        out[at(j)] = log_space ? xd[at(j)] - mx - log_z
                               : std::exp(xd[at(j)] - mx) / z;
    }
  return Record(op, x.shape(), std::move(out), {x}, [sp, log_space](Node &self) {
    auto &g = self.inputs[0]->EnsureGrad();
    for (int64_t o = 0; o < sp.outer; ++o)
      for (int64_t i = 0; i < sp.inner; ++i) {
        auto at = [&](int64_t j) { return (o * sp.n + j) * sp.inner + i; };
        double acc = 0.0;
        for (int64_t j = 0; j < sp.n; ++j)
          acc += log_space ? self.grad[at(j)]
                           : self.grad[at(j)] * self.data[at(j)];
        for (int64_t j = 0; j < sp.n; ++j) {
          const double y = self.data[at(j)];
          g[at(j)] += log_space ? self.grad[at(j)] - std::exp(y) * acc
                                : y * (self.grad[at(j)] - acc);
        }
      }
  });
}

}  // namespace

Tensor Softmax(const Tensor &x, int axis) { return SoftmaxImpl(x, axis, false); }
Tensor LogSoftmax(const Tensor &x, int axis) {
  return SoftmaxImpl(x, axis, true);
}

Tensor GlobalLayerNorm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                       double eps) {
  RequireRank("layer_norm_global", x, 2);
  const int c = x.dim(0), t = x.dim(1);
  if (gain.shape() != Shape{c}) ShapeFail("layer_norm_global", x.shape(), gain.shape());
  if (bias.shape() != Shape{c}) ShapeFail("layer_norm_global", x.shape(), bias.shape());
  const int64_t n = x.size();
  auto xd = x.data();
  double mean = 0.0;
  for (double v : xd) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : xd) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + eps);
  auto xhat = std::make_shared<std::vector<double>>(n);
  std::vector<double> out(n);
  const double *gd = gain.data().data();
  const double *bd = bias.data().data();
  double *xh = xhat->data();
  for (int ci = 0; ci < c; ++ci)
    for (int ti = 0; ti < t; ++ti) {
      const int64_t i = static_cast<int64_t>(ci) * t + ti;
      xh[i] = (xd[i] - mean) * inv_std;
      out[i] = gd[ci] * xh[i] + bd[ci];
    }
  return Record("layer_norm_global", x.shape(), std::move(out), {x, gain, bias},
                [c, t, n, inv_std, xhat](Node &self) {
                  Node &nx = *self.inputs[0];
                  Node &ng = *self.inputs[1];
                  Node &nb = *self.inputs[2];
                  const auto &gy = self.grad;
                  if (ng.requires_grad || nb.requires_grad) {
                    for (int ci = 0; ci < c; ++ci) {
                      double dg = 0.0, db = 0.0;
                      for (int ti = 0; ti < t; ++ti) {
                        const int64_t i = static_cast<int64_t>(ci) * t + ti;
                        dg += gy[i] * (*xhat)[i];
                        db += gy[i];
                      }
                      if (ng.requires_grad) ng.EnsureGrad()[ci] += dg;
                      if (nb.requires_grad) nb.EnsureGrad()[ci] += db;
                    }
                  }
                  if (!nx.requires_grad) return;
                  // dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
                  double m1 = 0.0, m2 = 0.0;
                  for (int ci = 0; ci < c; ++ci)
                    for (int ti = 0; ti < t; ++ti) {
                      const int64_t i = static_cast<int64_t>(ci) * t + ti;
                      const double d = gy[i] * ng.data[ci];
                      m1 += d;
                      m2 += d * (*xhat)[i];
                    }
                  m1 /= static_cast<double>(n);
                  m2 /= static_cast<double>(n);
                  auto &gx = nx.EnsureGrad();
                  for (int ci = 0; ci < c; ++ci)
                    for (int ti = 0; ti < t; ++ti) {
                      const int64_t i = static_cast<int64_t>(ci) * t + ti;
                      const double d = gy[i] * ng.data[ci];
                      gx[i] += inv_std * (d - m1 - (*xhat)[i] * m2);
                    }
                });
}

Tensor Scale(const Tensor &x, double factor) {
  return Mul(x, Tensor::Scalar(factor));
}
Tensor AddScalar(const Tensor &x, double value) {
  return Add(x, Tensor::Scalar(value));
}
Tensor Neg(const Tensor &x) { return Scale(x, -1.0); }
Tensor Dot(const Tensor &a, const Tensor &b) { return Sum(Mul(a, b)); }

Tensor Reshape(const Tensor &x, const Shape &shape) {
  if (NumElements(shape) != x.size())
    throw ShapeError("reshape: cannot view " + ShapeString(x.shape()) + " as " +
                     ShapeString(shape));
  std::vector<double> out(x.data().begin(), x.data().end());
  return Record("reshape", shape, std::move(out), {x}, [](Node &self) {
    auto &g = self.inputs[0]->EnsureGrad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

namespace {

constexpr std::array<std::string_view, 20> kKinds = {
    "add",     "sub",          "mul",          "matmul",
    "conv1d",  "conv1d_transpose", "prelu",    "sigmoid",
    "relu",    "mean",         "sum",          "power",
    "log",     "exp",          "concat",       "slice",
    "layer_norm_global", "softmax", "log_softmax", "index_select"};

void Arity(std::string_view kind, std::span<const Tensor> in, size_t n) {
  if (in.size() != n)
    throw ShapeError(std::string(kind) + ": expected " + std::to_string(n) +
                     " inputs, got " + std::to_string(in.size()));
}

}  // namespace

std::span<const std::string_view> OpKinds() { return kKinds; }

Tensor Apply(std::string_view kind, std::span<const Tensor> in,
             const OpAttrs &at) {
  if (kind == "add") return Arity(kind, in, 2), Add(in[0], in[1]);
  if (kind == "sub") return Arity(kind, in, 2), Sub(in[0], in[1]);
  if (kind == "mul") return Arity(kind, in, 2), Mul(in[0], in[1]);
  if (kind == "matmul") return Arity(kind, in, 2), MatMul(in[0], in[1]);
  if (kind == "conv1d") {
    Arity(kind, in, 2);
    return Conv1d(in[0], in[1], {at.stride, at.dilation, at.groups, at.padding});
  }
  if (kind == "conv1d_transpose")
    return Arity(kind, in, 2), Conv1dTranspose(in[0], in[1], at.stride);
  if (kind == "prelu") return Arity(kind, in, 2), PRelu(in[0], in[1]);
  if (kind == "sigmoid") return Arity(kind, in, 1), Sigmoid(in[0]);
  if (kind == "relu") return Arity(kind, in, 1), Relu(in[0]);
  if (kind == "mean") return Arity(kind, in, 1), Mean(in[0], at.axis);
  if (kind == "sum") return Arity(kind, in, 1), Sum(in[0], at.axis);
  if (kind == "power") return Arity(kind, in, 1), Pow(in[0], at.exponent);
  if (kind == "log") return Arity(kind, in, 1), Log(in[0]);
  if (kind == "exp") return Arity(kind, in, 1), Exp(in[0]);
  if (kind == "concat") return Concat(in, at.axis);
  if (kind == "slice")
    return Arity(kind, in, 1), Slice(in[0], at.axis, at.begin, at.end);
  if (kind == "layer_norm_global")
    return Arity(kind, in, 3), GlobalLayerNorm(in[0], in[1], in[2], at.eps);
  if (kind == "softmax") return Arity(kind, in, 1), Softmax(in[0], at.axis);
  if (kind == "log_softmax")
    return Arity(kind, in, 1), LogSoftmax(in[0], at.axis);
  if (kind == "index_select")
    return Arity(kind, in, 1), IndexSelect(in[0], at.axis, at.indices);
  throw UsageError("unknown op kind '" + std::string(kind) + "'");
}

}  // namespace tdsb
