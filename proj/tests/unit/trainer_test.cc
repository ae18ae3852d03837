// tests/unit/trainer_test.cc

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
#include <filesystem>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "tdsb/corpus/corpus.h"
#include "tdsb/dsp/wav.h"
#include "tdsb/eval/eval.h"
#include "tdsb/loss/loss.h"
#include "tdsb/model/checkpoint.h"
#include "tdsb/trainer/adam.h"
#include "tdsb/trainer/config.h"
#include "tdsb/trainer/evaluate.h"
#include "tdsb/trainer/trainer.h"
#include "tdsb/util/error.h"

using namespace tdsb;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path Scratch(const std::string &name) {
  fs::path p = fs::temp_directory_path() / ("tdsb_trainer_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Small corpus shared by the tests below, built once per process.
const fs::path &TinyCorpus(int channels) {
  static fs::path dirs[3];
  fs::path &d = dirs[channels];
  if (d.empty()) {
    d = Scratch("corpus" + std::to_string(channels));
    CorpusConfig cfg;
    cfg.num_speakers = 6;
    cfg.num_test_speakers = 2;
    cfg.num_train_mixtures = 6;
    cfg.num_test_mixtures = 3;
    cfg.utterances_per_speaker = 3;
    cfg.min_utterance_s = 0.5;
    cfg.max_utterance_s = 0.6;
    cfg.channels = channels;
    cfg.seed = 3;
    BuildCorpus(cfg, d.string());
  }
  return d;
}

TrainConfig MiniConfig() {
  TrainConfig c = ParseTrainConfig("preset = mini\nsegment_s = 0.25\nbatch_size = 2\n"
                                   "max_epochs = 4\nvalid_fraction = 0.34\nlr = 0.003\n");
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  TrainConfig c = ParseTrainConfig(
      "# comment line\n"
      "B = 24   # trailing comment\n"
      "preset = mini\n"
      "model = tasnet\n"
      "alpha=0\n"
      "lr = 2e-4\n"
      "seed = 12\n");
  CHECK(c.topology.N == 8);
  CHECK(c.topology.B == 24);
  CHECK(c.topology.embedding_dim == 24);
  CHECK(c.topology.kind == ModelKind::kTasNet);
  CHECK(c.topology.num_outputs == 2);
  CHECK(c.alpha == 0.0);
  CHECK(c.lr == 2e-4);
  CHECK(c.seed == 12);

  TrainConfig d = ParseTrainConfig("");
  CHECK(d.topology == TopologyConfig::Desk());
  CHECK(d.alpha == 10.0);

  auto message = [](const std::string &text) {
    try {
      ParseTrainConfig(text, "cfg.txt");
    } catch (const UsageError &e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("lr = 1\n\nwidth = 3\n").rfind("cfg.txt:3:", 0) == 0);
  CHECK(message("lr = 1\nlr = 2\n").rfind("cfg.txt:2:", 0) == 0);
  CHECK(message("N = many\n").rfind("cfg.txt:1:", 0) == 0);
  CHECK(message("just words\n").rfind("cfg.txt:1:", 0) == 0);
  CHECK(message("ipd = sideways\n").rfind("cfg.txt:1:", 0) == 0);
  CHECK(message("preset = huge\n").rfind("cfg.txt:1:", 0) == 0);
  CHECK_THROWS_AS(LoadTrainConfig("/nonexistent/cfg.txt"), DataError);

  TrainConfig v;
  CHECK_NOTHROW(v.Validate(8000));
  v.lr = 0.0;
  CHECK_THROWS_AS(v.Validate(8000), UsageError);
  v = TrainConfig();
  v.alpha = -1.0;
  CHECK_THROWS_AS(v.Validate(8000), UsageError);
  v = TrainConfig();
  v.segment_s = 0.001;  // 8 samples < L = 16
  CHECK_THROWS_AS(v.Validate(8000), UsageError);
}

TEST_CASE("adam and gradient clipping") {
  ParamSet params;
  Tensor &w = params.Add("w", Tensor::FromData({3}, {1.0, -2.0, 0.5}));
  Adam adam(params);
  w.mutable_grad()[0] = 4.0;
  w.mutable_grad()[1] = -0.001;
  w.mutable_grad()[2] = 0.0;
  adam.Step(0.1);
  // First bias-corrected step moves each coordinate by about lr * sign(g).
  CHECK(w.at(0) == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(w.at(1) == doctest::Approx(-1.9).epsilon(1e-6));
  CHECK(w.at(2) == 0.5);
  CHECK(adam.step_count() == 1);

  w.mutable_grad()[0] = 3.0;
  w.mutable_grad()[1] = 4.0;
  w.mutable_grad()[2] = 0.0;
  CHECK(GlobalGradNorm(params) == 5.0);
  CHECK(ClipGradNorm(params, 1.0) == 5.0);
  CHECK(GlobalGradNorm(params) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ClipGradNorm(params, 0.0) == doctest::Approx(1.0));
  CHECK(GlobalGradNorm(params) == doctest::Approx(1.0));
}

TEST_CASE("training is seed-deterministic and resumable") {
  const fs::path corpus = TinyCorpus(1);
  const auto records = ReadManifest((corpus / "train.tsv").string());
  const fs::path d = Scratch("resume");
  TrainConfig cfg = MiniConfig();

  TrainOptions a{(d / "a.ckpt").string()}, b{(d / "b.ckpt").string()};
  TrainResult ra = Train(records, cfg, a);
  Train(records, cfg, b);
  REQUIRE(ra.history.size() == 4);
  CHECK(Slurp(MetricsPath(a.out_path)) == Slurp(MetricsPath(b.out_path)));
  CHECK(Slurp(a.out_path) == Slurp(b.out_path));
  CHECK(Slurp(ResumePath(a.out_path)) == Slurp(ResumePath(b.out_path)));

  // Interrupt after two epochs, then resume to four.
  TrainOptions c{(d / "c.ckpt").string()};
  TrainConfig half = cfg;
  half.max_epochs = 2;
  Train(records, half, c);
  c.resume = true;
  TrainResult rc = Train(records, cfg, c);
  CHECK(rc.history.size() == 4);
  CHECK(Slurp(MetricsPath(a.out_path)) == Slurp(MetricsPath(c.out_path)));
  CHECK(Slurp(a.out_path) == Slurp(c.out_path));
  CHECK(Slurp(ResumePath(a.out_path)) == Slurp(ResumePath(c.out_path)));

  // Log format and checkpoint metadata.
  std::ifstream log(MetricsPath(a.out_path));
  std::string header, first;
  std::getline(log, header);
  std::getline(log, first);
  CHECK(header == "#epoch\tloss\tsisnr\tce");
  CHECK(first.rfind("1\t", 0) == 0);
  CHECK(std::count(first.begin(), first.end(), '\t') == 3);
  Checkpoint ck = LoadCheckpoint(a.out_path);
  CHECK(ck.meta.alpha == 10.0);
  CHECK(ck.meta.speakers == SpeakerLabels(records));
  CHECK(ck.meta.epoch == ra.best_epoch);
  CHECK(ck.topology.num_speakers == static_cast<int>(ck.meta.speakers.size()));
  for (const auto &h : ra.history) {
    CHECK(std::isfinite(h.loss));
    CHECK(h.cross_entropy > 0.0);
  }

  TrainConfig other = cfg;
  other.seed = 99;
  TrainOptions e{(d / "e.ckpt").string()};
  Train(records, other, e);
  CHECK(Slurp(MetricsPath(a.out_path)) != Slurp(MetricsPath(e.out_path)));

  TrainConfig wider = cfg;
  wider.topology.H = 16;
  c.resume = true;
  CHECK_THROWS_AS(Train(records, wider, c), UsageError);
  fs::remove_all(d);
}

TEST_CASE("training guards") {
  const auto mono = ReadManifest((TinyCorpus(1) / "train.tsv").string());
  const fs::path d = Scratch("guards");
  TrainConfig cfg = MiniConfig();
  cfg.max_epochs = 1;
  TrainOptions opt{(d / "x.ckpt").string()};

  TrainConfig ipd = cfg;
  ipd.topology.ipd_mode = IpdMode::kInput;
  try {
    Train(mono, ipd, opt);
    FAIL("expected a channel-count error");
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find("channel") != std::string::npos);
  }

  TrainConfig bad = cfg;
  bad.topology.kind = ModelKind::kTasNet;
  bad.topology.ipd_mode = IpdMode::kInternal;
  CHECK_THROWS_AS(Train(mono, bad, opt), UsageError);
  CHECK_THROWS_AS(Train({}, cfg, opt), DataError);

  TrainConfig explode = cfg;
  explode.lr = 1e300;
  explode.clip_norm = 0.0;
  explode.max_epochs = 3;
  try {
    Train(mono, explode, opt);
    FAIL("expected a numeric failure");
  } catch (const NumericError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("mixture") != std::string::npos);
    bool names_one = false;
    for (const auto &r : mono) names_one |= msg.find(r.mixture_id) != std::string::npos;
    CHECK(names_one);
  }

  std::vector<MixtureRecord> missing = mono;
  missing[1].src1_path = (d / "nope.wav").string();
  CHECK_THROWS_AS(Train(missing, cfg, opt), DataError);
  fs::remove_all(d);
}

TEST_CASE("checkpoint evaluation") {
  const fs::path corpus = TinyCorpus(1);
  const std::string test_manifest = (corpus / "test.tsv").string();
  const auto records = ReadManifest(test_manifest);
  const fs::path d = Scratch("eval");

  TopologyConfig pass;
  pass.kind = ModelKind::kPassthrough;
  pass.Normalize();
  Model identity(pass, 0);
  SaveCheckpoint((d / "pass.ckpt").string(), MakeCheckpoint(identity));
  const auto results = EvaluateCheckpoint((d / "pass.ckpt").string(), test_manifest,
                                          SelectionMethod::kOracle);
  REQUIRE(results.size() == records.size());
  for (const auto &row : SummarizeByPairType(results)) CHECK(row.mean_improvement == 0.0);

  // Perfect estimates: improvement is SiSNR(x, x) - SiSNR(x, y), recomputed
  // directly from the files.
  std::vector<RecordResult> oracle;
  for (const auto &r : records) {
    const auto target = ReadWav(r.src1_path).channel(0);
    const auto mix = ReadWav(r.mixture_path).channel(0);
    oracle.push_back(ScoreEstimate(r.mixture_id, r.pair_type, target, mix, target));
    CHECK(oracle.back().improvement ==
          doctest::Approx(SiSnrDb(target, target) - SiSnrDb(target, mix)).epsilon(1e-12));
  }
  CHECK(HistogramReport(oracle, 1.0).overall_failure_rate == 0.0);

  // Separation baseline: oracle selection records both indices.
  TopologyConfig tas = TopologyConfig::Miniature();
  tas.kind = ModelKind::kTasNet;
  tas.Normalize();
  Model sep(tas, 4);
  const auto sep_results = EvaluateModel(sep, records);
  for (const auto &r : sep_results) {
    CHECK(r.chosen == r.oracle);
    CHECK((r.chosen == 1 || r.chosen == 2));
  }
  EvaluateOptions cosine;
  cosine.selection = SelectionMethod::kCosine;
  CHECK_THROWS_AS(EvaluateModel(sep, records, cosine), UsageError);
  TopologyConfig ext = TopologyConfig::Miniature();
  Model aux(ext, 5);
  cosine.selector = &aux;
  const auto cos_results = EvaluateModel(sep, records, cosine);
  CHECK(cos_results.size() == records.size());

  // Topology mismatch: an IPD model on mono recordings.
  TopologyConfig stereo = TopologyConfig::Miniature();
  stereo.ipd_mode = IpdMode::kInput;
  Model needs_two(stereo, 6);
  CHECK_THROWS_AS(EvaluateModel(needs_two, records), DataError);
  // The same model runs on a two-channel corpus.
  const auto stereo_records = ReadManifest((TinyCorpus(2) / "test.tsv").string());
  CHECK(EvaluateModel(needs_two, stereo_records).size() == stereo_records.size());

  WriteReport((d / "report").string(), results);
  for (const char *f : {"summary.tsv", "records.tsv", "histogram.tsv"})
    CHECK(fs::exists(d / "report" / f));
  CHECK(Slurp(d / "report" / "histogram.tsv").rfind("#bin_low\tcount_AA\tcount_BB\tcount_AB\n", 0) == 0);
  fs::remove_all(d);
}
