// tdsb/eval/eval.h

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

#ifndef TDSB_EVAL_EVAL_H_
#define TDSB_EVAL_EVAL_H_

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tdsb/corpus/corpus.h"

namespace tdsb {

class Model;

enum class SelectionMethod { kOracle, kCosine };
std::string SelectionMethodName(SelectionMethod m);
SelectionMethod ParseSelectionMethod(const std::string &s);

struct SelectionResult {
  int chosen_index = 1;    // 1 or 2
  double score_gap = 0.0;  // chosen score minus the other score
  SelectionMethod method = SelectionMethod::kOracle;
};

/// Picks the output with the higher SiSNR against the target; ties go to 1.
SelectionResult OracleSelect(std::span<const double> est1,
                             std::span<const double> est2,
                             std::span<const double> target);

/// Cosine similarity; -1 when either vector has zero norm.
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

/// Picks the output whose speaker embedding (from `aux`, a TD-SpeakerBeam
/// model) is closest in cosine to the adaptation utterance's.
SelectionResult CosineSelect(std::span<const double> est1,
                             std::span<const double> est2,
                             std::span<const double> adaptation,
                             const Model &aux);

/// Speaker embedding of a waveform as plain numbers (no autodiff tape).
std::vector<double> EmbedWaveform(const Model &aux, std::span<const double> x);

/// Per-mixture evaluation outcome.
struct RecordResult {
  std::string mixture_id;
  PairType pair_type = PairType::kAB;
  double mixture_sisnr = 0.0;  // SiSNR(target, mixture channel 0)
  double output_sisnr = 0.0;   // SiSNR(target, chosen output)
  double improvement = 0.0;    // output_sisnr - mixture_sisnr
  int chosen = 0;              // 1/2 for separation models, 0 otherwise
  int oracle = 0;              // oracle choice for separation models
};

struct PairTypeRow {
  std::string label;  // "AA", "BB", "AB" or "avg"
  int count = 0;
  double mean_improvement = 0.0;
};

/// Rows AA, BB, AB, avg; avg is the count-weighted mean over all records.
/// Rows with no records report count 0 and mean 0.
std::vector<PairTypeRow> SummarizeByPairType(const std::vector<RecordResult> &records);

/// Mean improvement over AA and BB records together.
double SameFamilyMean(const std::vector<RecordResult> &records);

struct Histogram {
  double bin_width = 1.0;
  double first_bin_low = 0.0;
  std::vector<std::array<int, 3>> counts;  // per bin: AA, BB, AB
  std::array<int, 3> totals{};
  std::array<double, 3> failure_rate{};   // improvement <= 0 dB
  double overall_failure_rate = 0.0;
};

/// Bins improvements in [k w, (k+1) w). DataError on empty input,
/// UsageError on a non-positive width.
Histogram HistogramReport(const std::vector<RecordResult> &records, double bin_width);

/// Writes summary.tsv, records.tsv and histogram.tsv into `dir` (created
/// if needed).
void WriteReport(const std::string &dir, const std::vector<RecordResult> &records,
                 double bin_width = 1.0);

/// Human-readable pair-type table.
void PrintSummary(std::ostream &os, const std::vector<PairTypeRow> &rows);

}  // namespace tdsb

#endif  // TDSB_EVAL_EVAL_H_
