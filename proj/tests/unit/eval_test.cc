// tests/unit/eval_test.cc

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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tdsb/eval/eval.h"
#include "tdsb/loss/loss.h"
#include "tdsb/model/model.h"
#include "tdsb/util/error.h"

using namespace tdsb;

namespace {

std::vector<double> Noise(uint64_t seed, int n, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> x(n);
  for (double &v : x) v = d(rng);
  return x;
}

std::vector<double> Scaled(const std::vector<double> &x, double k) {
  std::vector<double> y(x);
  for (double &v : y) v *= k;
  return y;
}

RecordResult Rec(PairType t, double improvement) {
  RecordResult r;
  r.pair_type = t;
  r.improvement = improvement;
  return r;
}

}  // namespace

TEST_CASE("oracle selection") {
  const auto target = Noise(1, 400);
  const auto noise = Noise(2, 400);
  CHECK(OracleSelect(target, noise, target).chosen_index == 1);
  CHECK(OracleSelect(noise, Scaled(target, 0.7), target).chosen_index == 2);
  const SelectionResult tie = OracleSelect(noise, noise, target);
  CHECK(tie.chosen_index == 1);
  CHECK(tie.score_gap == 0.0);
  CHECK(tie.method == SelectionMethod::kOracle);

  // Matches an exhaustive argmax, and swapping candidates swaps the index.
  for (uint64_t s = 0; s < 30; ++s) {
    auto a = Noise(100 + s, 300), b = Noise(200 + s, 300);
    std::vector<double> t(300);
    const double w = 0.1 * static_cast<double>(s % 10);
    for (int i = 0; i < 300; ++i) t[i] = w * a[i] + (1 - w) * b[i];
    const SelectionResult r = OracleSelect(a, b, t);
    const double sa = SiSnrDb(t, a), sb = SiSnrDb(t, b);
    CHECK(r.chosen_index == (sb > sa ? 2 : 1));
    CHECK(r.score_gap >= 0.0);
    CHECK(std::abs(r.score_gap - std::abs(sa - sb)) < 1e-12);
    if (sa != sb) CHECK(OracleSelect(b, a, t).chosen_index == 3 - r.chosen_index);
  }
  CHECK_THROWS_AS(OracleSelect(Noise(1, 10), Noise(2, 11), Noise(3, 10)), ShapeError);
}

TEST_CASE("cosine similarity") {
  const std::vector<double> a = {1, 2, 3}, b = {-2, 0.5, 4}, z = {0, 0, 0};
  CHECK(CosineSimilarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(CosineSimilarity(a, Scaled(a, -1)) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(CosineSimilarity(a, z) == -1.0);
  CHECK(CosineSimilarity(z, z) == -1.0);
  CHECK(CosineSimilarity(Scaled(a, 7.5), Scaled(b, 0.01)) ==
        doctest::Approx(CosineSimilarity(a, b)).epsilon(1e-14));
  CHECK_THROWS_AS(CosineSimilarity(a, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST_CASE("cosine selection with an untrained auxiliary network") {
  TopologyConfig topo = TopologyConfig::Miniature();
  Model aux(topo, 3);
  const auto adapt = Noise(5, 200, 0.1);
  const auto other = Noise(6, 200, 0.1);
  // A candidate identical to the adaptation utterance has similarity 1.
  CHECK(CosineSelect(adapt, other, adapt, aux).chosen_index == 1);
  CHECK(CosineSelect(other, adapt, adapt, aux).chosen_index == 2);
  CHECK(CosineSelect(other, adapt, adapt, aux).method == SelectionMethod::kCosine);
  const auto e = EmbedWaveform(aux, adapt);
  CHECK(e.size() == static_cast<size_t>(topo.B));
}

TEST_CASE("pair-type summary uses count weights") {
  std::vector<RecordResult> recs = {Rec(PairType::kAA, 2.0), Rec(PairType::kAA, 4.0),
                                    Rec(PairType::kBB, 6.0), Rec(PairType::kAB, -3.0)};
  const auto rows = SummarizeByPairType(recs);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].label == "AA");
  CHECK(rows[0].count == 2);
  CHECK(rows[0].mean_improvement == 3.0);
  CHECK(rows[1].mean_improvement == 6.0);
  CHECK(rows[2].mean_improvement == -3.0);
  CHECK(rows[3].label == "avg");
  CHECK(rows[3].count == 4);
  CHECK(rows[3].mean_improvement == doctest::Approx(9.0 / 4.0));
  CHECK(SameFamilyMean(recs) == 4.0);
  CHECK_THROWS_AS(SameFamilyMean({Rec(PairType::kAB, 1.0)}), DataError);

  std::ostringstream os;
  PrintSummary(os, rows);
  CHECK(os.str().find("avg") != std::string::npos);
}

TEST_CASE("histogram partitions the records") {
  std::vector<RecordResult> same(5, Rec(PairType::kBB, 3.3));
  Histogram h1 = HistogramReport(same, 1.0);
  CHECK(h1.counts.size() == 1);
  CHECK(h1.first_bin_low == 3.0);
  CHECK(h1.counts[0][1] == 5);
  CHECK(h1.overall_failure_rate == 0.0);

  std::vector<RecordResult> recs;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-6.0, 14.0);
  for (int i = 0; i < 90; ++i) recs.push_back(Rec(static_cast<PairType>(i % 3), u(rng)));
  recs.push_back(Rec(PairType::kAA, 0.0));
  Histogram h = HistogramReport(recs, 2.5);
  std::array<int, 3> sums{};
  for (const auto &bin : h.counts)
    for (int t = 0; t < 3; ++t) sums[t] += bin[t];
  CHECK(sums == h.totals);
  CHECK(h.totals[0] == 31);
  int failures = 0;
  for (const auto &r : recs) failures += r.improvement <= 0.0;
  CHECK(h.overall_failure_rate == doctest::Approx(failures / 91.0));

  CHECK_THROWS_AS(HistogramReport({}, 1.0), DataError);
  CHECK_THROWS_AS(HistogramReport(recs, 0.0), UsageError);
}
