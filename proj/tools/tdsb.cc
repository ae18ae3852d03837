// tools/tdsb.cc

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

// tdsb: command-line front end for corpus generation, training, extraction,
// evaluation and gradient checking.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tdsb/corpus/corpus.h"
#include "tdsb/dsp/wav.h"
#include "tdsb/eval/eval.h"
#include "tdsb/loss/loss.h"
#include "tdsb/model/checkpoint.h"
#include "tdsb/model/model.h"
#include "tdsb/model/model_gradcheck.h"
#include "tdsb/trainer/config.h"
#include "tdsb/trainer/evaluate.h"
#include "tdsb/trainer/trainer.h"
#include "tdsb/util/error.h"

namespace {

using namespace tdsb;

struct MixgenArgs {
  std::string out;
  int speakers = 16;
  int mixtures = 256;
  int test_mixtures = -1;
  int test_speakers = 0;
  uint64_t seed = 0;
  int channels = 1;
};

struct TrainArgs {
  std::string manifest, config, out, mode, ipd;
  std::optional<double> alpha;
  std::optional<uint64_t> seed;
  std::optional<int> max_epochs;
  bool resume = false;
  bool quiet = false;
};

struct ExtractArgs {
  std::string ckpt, mixture, adapt, out, reference;
};

struct EvalArgs {
  std::string ckpt, manifest, report, select = "oracle", aux;
  double bin_width = 1.0;
};

int RunMixgen(const MixgenArgs &a) {
  CorpusConfig cfg;
  cfg.num_speakers = a.speakers;
  cfg.num_test_speakers = a.test_speakers;
  cfg.num_train_mixtures = a.mixtures;
  cfg.num_test_mixtures = a.test_mixtures >= 0 ? a.test_mixtures : std::max(1, a.mixtures / 4);
  cfg.seed = a.seed;
  cfg.channels = a.channels;
  const auto rows = BuildCorpus(cfg, a.out);
  std::printf("%-6s %6s %6s %6s %6s %6s\n", "split", "spk_A", "spk_B", "AA", "BB", "AB");
  for (const auto &r : rows)
    std::printf("%-6s %6d %6d %6d %6d %6d\n", r.split.c_str(), r.speakers_a, r.speakers_b,
                r.mixtures_aa, r.mixtures_bb, r.mixtures_ab);
  return 0;
}

int RunTrain(const TrainArgs &a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig() : LoadTrainConfig(a.config);
  if (!a.mode.empty()) cfg.topology.kind = ParseModelKind(a.mode);
  if (!a.ipd.empty()) cfg.topology.ipd_mode = ParseIpdMode(a.ipd);
  if (a.alpha) cfg.alpha = *a.alpha;
  if (a.seed) cfg.seed = *a.seed;
  if (a.max_epochs) cfg.max_epochs = *a.max_epochs;
  cfg.topology.Normalize();
  cfg.topology.Validate();

  TrainOptions opt;
  opt.out_path = a.out;
  opt.resume = a.resume;
  if (!a.quiet) {
    opt.on_epoch = [](const EpochMetrics &m) {
      std::printf("epoch %4d  loss %9.4f  sisnr %8.3f dB  ce %8.4f\n", m.epoch, m.loss,
                  m.sisnr_db, m.cross_entropy);
      std::fflush(stdout);
    };
  }
  const TrainResult r = Train(ReadManifest(a.manifest), cfg, opt);
  std::printf("best validation SiSNR %.3f dB at epoch %d -> %s\n", r.best_score, r.best_epoch,
              a.out.c_str());
  return 0;
}

int RunExtract(const ExtractArgs &a) {
  std::unique_ptr<Model> model = LoadModel(LoadCheckpoint(a.ckpt));
  const TopologyConfig &topo = model->topology();
  if (topo.kind == ModelKind::kTasNet)
    throw UsageError("extract needs a td-spkbeam (or passthrough) checkpoint; "
                     "evaluate separation checkpoints with 'eval'");
  const AudioSignal mixture = ReadWav(a.mixture);
  if (topo.ipd_mode != IpdMode::kNone && topo.kind != ModelKind::kPassthrough &&
      mixture.num_channels() < 2)
    throw DataError("topology mismatch: checkpoint uses IPD but " + a.mixture + " has " +
                    std::to_string(mixture.num_channels()) + " channel(s)");
  const AudioSignal adapt = ReadWav(a.adapt);

  NoGradGuard no_grad;
  const ModelInput in = PrepareInput(mixture, topo);
  const Tensor est = model->Extract(in.waveform, WaveformTensor(adapt.channel(0)), in.ipd).estimate;
  const std::vector<double> samples(est.data().begin(), est.data().end());
  WriteWav(a.out, AudioSignal::Mono(samples, mixture.sample_rate));

  if (!a.reference.empty()) {
    const std::vector<double> ref = ReadWav(a.reference).channel(0);
    const RecordResult r = ScoreEstimate(a.mixture, PairType::kAB, ref, mixture.channel(0), samples);
    std::printf("sisnr_db\t%.6f\nsisnri_db\t%.6f\n", r.output_sisnr, r.improvement);
  }
  return 0;
}

int RunEval(const EvalArgs &a) {
  const SelectionMethod method = ParseSelectionMethod(a.select);
  const auto results = EvaluateCheckpoint(a.ckpt, a.manifest, method, a.aux);
  WriteReport(a.report, results, a.bin_width);
  PrintSummary(std::cout, SummarizeByPairType(results));
  const Histogram h = HistogramReport(results, a.bin_width);
  std::printf("failure rate (SiSNRi <= 0 dB): %.1f%%\n", 100.0 * h.overall_failure_rate);
  int agree = 0, separation = 0;
  for (const auto &r : results) {
    if (r.chosen == 0) continue;
    ++separation;
    agree += r.chosen == r.oracle;
  }
  if (separation)
    std::printf("selection agrees with oracle: %.1f%%\n", 100.0 * agree / separation);
  return 0;
}

int RunGradcheck(uint64_t seed) {
  int failures = 0;
  double worst = 0.0;
  const auto records = RunFullGradientSuite(seed);
  for (const auto &r : records) {
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed) {
      ++failures;
      std::printf("FAIL %s max_rel_error=%.3e\n", r.name.c_str(), r.max_rel_error);
    }
  }
  std::printf("%zu checks, %d failed, worst relative error %.3e\n", records.size(), failures,
              worst);
  if (failures) throw NumericError("gradient check failed");
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"TD-SpeakerBeam: time-domain target speaker extraction"};
  app.require_subcommand(1);

  MixgenArgs mix;
  auto *mixgen = app.add_subcommand("mixgen", "Generate a synthetic two-speaker corpus");
  mixgen->add_option("--out", mix.out, "Output directory")->required();
  mixgen->add_option("--speakers", mix.speakers, "Total speakers (training + test)");
  mixgen->add_option("--mixtures", mix.mixtures, "Training mixtures");
  mixgen->add_option("--test-mixtures", mix.test_mixtures,
                     "Test mixtures (default: a quarter of --mixtures)");
  mixgen->add_option("--test-speakers", mix.test_speakers,
                     "Held-out speakers (default: a quarter of --speakers)");
  mixgen->add_option("--seed", mix.seed, "Random seed");
  mixgen->add_option("--channels", mix.channels, "Microphones")->check(CLI::IsMember({1, 2}));

  TrainArgs tr;
  auto *train = app.add_subcommand("train", "Train a model on a manifest");
  train->add_option("--manifest", tr.manifest, "Training manifest (train.tsv)")->required();
  train->add_option("--config", tr.config, "key=value training config");
  train->add_option("--out", tr.out, "Checkpoint path")->required();
  train->add_option("--mode", tr.mode, "td-spkbeam | tasnet | passthrough");
  train->add_option("--ipd", tr.ipd, "none | input | internal");
  train->add_option("--alpha", tr.alpha, "Speaker-ID loss weight");
  train->add_option("--seed", tr.seed, "Override the config seed");
  train->add_option("--max-epochs", tr.max_epochs, "Override the config epoch count");
  train->add_flag("--resume", tr.resume, "Continue from <out>.resume");
  train->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  ExtractArgs ex;
  auto *extract = app.add_subcommand("extract", "Extract the target speaker from a mixture");
  extract->add_option("--ckpt", ex.ckpt, "Checkpoint")->required();
  extract->add_option("--mixture", ex.mixture, "Mixture WAV")->required();
  extract->add_option("--adapt", ex.adapt, "Adaptation utterance WAV")->required();
  extract->add_option("--out", ex.out, "Output WAV")->required();
  extract->add_option("--reference", ex.reference, "Target WAV; prints SiSNR");

  EvalArgs ev;
  auto *eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  eval->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval->add_option("--manifest", ev.manifest, "Manifest")->required();
  eval->add_option("--report", ev.report, "Report directory")->required();
  eval->add_option("--select", ev.select, "Output selection for tasnet: oracle | cosine")
      ->check(CLI::IsMember({"oracle", "cosine"}));
  eval->add_option("--aux", ev.aux, "td-spkbeam checkpoint used by cosine selection");
  eval->add_option("--bin-width", ev.bin_width, "Histogram bin width (dB)");

  uint64_t gc_seed = 0;
  auto *gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--seed", gc_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App *culprit = app.get_subcommands().empty() ? &app : app.get_subcommands()[0];
    std::cerr << culprit->help();
    return ExitCodeFor(ErrorKind::kUsage);
  }

  try {
    if (*mixgen) return RunMixgen(mix);
    if (*train) return RunTrain(tr);
    if (*extract) return RunExtract(ex);
    if (*eval) return RunEval(ev);
    if (*gradcheck) return RunGradcheck(gc_seed);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
