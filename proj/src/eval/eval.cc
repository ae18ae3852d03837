// src/eval/eval.cc

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

#include "tdsb/eval/eval.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "tdsb/autodiff/tensor.h"
#include "tdsb/loss/loss.h"
#include "tdsb/model/model.h"
#include "tdsb/util/error.h"

namespace tdsb {

std::string SelectionMethodName(SelectionMethod m) {
  return m == SelectionMethod::kOracle ? "oracle" : "cosine";
}

SelectionMethod ParseSelectionMethod(const std::string &s) {
  if (s == "oracle") return SelectionMethod::kOracle;
  if (s == "cosine") return SelectionMethod::kCosine;
  throw UsageError("unknown selection '" + s + "' (expected oracle or cosine)");
}

SelectionResult OracleSelect(std::span<const double> est1,
                             std::span<const double> est2,
                             std::span<const double> target) {
  const double s1 = SiSnrDb(target, est1);
  const double s2 = SiSnrDb(target, est2);
  SelectionResult r;
  r.method = SelectionMethod::kOracle;
  r.chosen_index = s2 > s1 ? 2 : 1;
  r.score_gap = std::abs(s1 - s2);
  return r;
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("cosine similarity of vectors with different sizes");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return -1.0;
  return ab / std::sqrt(aa * bb);
}

std::vector<double> EmbedWaveform(const Model &aux, std::span<const double> x) {
  NoGradGuard no_grad;
  Tensor e = aux.AuxEmbed(WaveformTensor({x.begin(), x.end()}));
  return {e.data().begin(), e.data().end()};
}

SelectionResult CosineSelect(std::span<const double> est1,
                             std::span<const double> est2,
                             std::span<const double> adaptation,
                             const Model &aux) {
  const auto ea = EmbedWaveform(aux, adaptation);
  const double c1 = CosineSimilarity(EmbedWaveform(aux, est1), ea);
  const double c2 = CosineSimilarity(EmbedWaveform(aux, est2), ea);
  SelectionResult r;
  r.method = SelectionMethod::kCosine;
  r.chosen_index = c2 > c1 ? 2 : 1;
  r.score_gap = std::abs(c1 - c2);
  return r;
}

std::vector<PairTypeRow> SummarizeByPairType(const std::vector<RecordResult> &records) {
  std::vector<PairTypeRow> rows = {{"AA"}, {"BB"}, {"AB"}, {"avg"}};
  for (const auto &r : records) {
    PairTypeRow &row = rows[static_cast<int>(r.pair_type)];
    ++row.count;
    row.mean_improvement += r.improvement;
    ++rows[3].count;
    rows[3].mean_improvement += r.improvement;
  }
  for (auto &row : rows)
    if (row.count) row.mean_improvement /= row.count;
  return rows;
}

double SameFamilyMean(const std::vector<RecordResult> &records) {
  double sum = 0.0;
  int n = 0;
  for (const auto &r : records) {
    if (r.pair_type == PairType::kAB) continue;
    sum += r.improvement;
    ++n;
  }
  if (n == 0) throw DataError("no same-family (AA/BB) records to average");
  return sum / n;
}

Histogram HistogramReport(const std::vector<RecordResult> &records, double bin_width) {
  if (!(bin_width > 0.0)) throw UsageError("histogram bin width must be > 0");
  if (records.empty()) throw DataError("histogram of an empty record set");
  Histogram h;
  h.bin_width = bin_width;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto &r : records) {
    lo = std::min(lo, r.improvement);
    hi = std::max(hi, r.improvement);
  }
  const long first = static_cast<long>(std::floor(lo / bin_width));
  const long last = static_cast<long>(std::floor(hi / bin_width));
  h.first_bin_low = first * bin_width;
  h.counts.assign(static_cast<size_t>(last - first + 1), {0, 0, 0});
  std::array<int, 3> failures{};
  int total_failures = 0;
  for (const auto &r : records) {
    const int type = static_cast<int>(r.pair_type);
    const long bin = static_cast<long>(std::floor(r.improvement / bin_width)) - first;
    ++h.counts[static_cast<size_t>(bin)][type];
    ++h.totals[type];
    if (r.improvement <= 0.0) {
      ++failures[type];
      ++total_failures;
    }
  }
  for (int t = 0; t < 3; ++t)
    h.failure_rate[t] = h.totals[t] ? static_cast<double>(failures[t]) / h.totals[t] : 0.0;
  h.overall_failure_rate = static_cast<double>(total_failures) / records.size();
  return h;
}

void WriteReport(const std::string &dir, const std::vector<RecordResult> &records,
                 double bin_width) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create report directory " + dir + ": " + ec.message());
  auto open = [&](const char *name) {
    std::ofstream out(fs::path(dir) / name, std::ios::trunc);
    if (!out) throw DataError("cannot write " + (fs::path(dir) / name).string());
    return out;
  };
  char buf[256];

  const Histogram h = HistogramReport(records, bin_width);
  {
    std::ofstream out = open("summary.tsv");
    out << "#pair_type\tcount\tmean_sisnri_db\tfailure_rate\n";
    const auto rows = SummarizeByPairType(records);
    for (size_t i = 0; i < rows.size(); ++i) {
      const double fail = i < 3 ? h.failure_rate[i] : h.overall_failure_rate;
      std::snprintf(buf, sizeof(buf), "%s\t%d\t%.6f\t%.6f\n", rows[i].label.c_str(),
                    rows[i].count, rows[i].mean_improvement, fail);
      out << buf;
    }
  }
  {
    std::ofstream out = open("records.tsv");
    out << "#mixture_id\tpair_type\tmixture_sisnr_db\toutput_sisnr_db\tsisnri_db\tchosen\toracle\n";
    for (const auto &r : records) {
      std::snprintf(buf, sizeof(buf), "\t%s\t%.17g\t%.17g\t%.17g\t%d\t%d\n",
                    PairTypeName(r.pair_type).c_str(), r.mixture_sisnr, r.output_sisnr,
                    r.improvement, r.chosen, r.oracle);
      out << r.mixture_id << buf;
    }
  }
  {
    std::ofstream out = open("histogram.tsv");
    out << "#bin_low\tcount_AA\tcount_BB\tcount_AB\n";
    for (size_t b = 0; b < h.counts.size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%g\t%d\t%d\t%d\n",
                    h.first_bin_low + static_cast<double>(b) * h.bin_width,
                    h.counts[b][0], h.counts[b][1], h.counts[b][2]);
      out << buf;
    }
  }
}

void PrintSummary(std::ostream &os, const std::vector<PairTypeRow> &rows) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-6s %7s %12s\n", "pair", "count", "SiSNRi(dB)");
  os << buf;
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof(buf), "%-6s %7d %12.2f\n", r.label.c_str(), r.count,
                  r.mean_improvement);
    os << buf;
  }
}

}  // namespace tdsb
