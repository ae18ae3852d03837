// src/trainer/trainer.cc

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

#include "tdsb/trainer/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "tdsb/dsp/wav.h"
#include "tdsb/loss/loss.h"
#include "tdsb/model/checkpoint.h"
#include "tdsb/nn/layers.h"
#include "tdsb/trainer/adam.h"
#include "tdsb/util/error.h"

namespace tdsb {

std::vector<std::string> SpeakerLabels(const std::vector<MixtureRecord> &records) {
  std::set<std::string> s;
  for (const auto &r : records) s.insert(r.target_spk);
  return {s.begin(), s.end()};
}

std::vector<TrainingExample> LoadExamples(const std::vector<MixtureRecord> &records,
                                          const TopologyConfig &topology,
                                          const std::vector<std::string> &speakers) {
  const bool needs_stereo =
      topology.kind != ModelKind::kPassthrough && topology.ipd_mode != IpdMode::kNone;
  std::vector<TrainingExample> out;
  out.reserve(records.size());
  for (const auto &r : records) {
    TrainingExample ex;
    ex.mixture_id = r.mixture_id;
    ex.pair_type = r.pair_type;
    ex.mixture = ReadWav(r.mixture_path);
    if (needs_stereo && ex.mixture.num_channels() < 2)
      throw DataError("mixture " + r.mixture_id + " has " +
                      std::to_string(ex.mixture.num_channels()) +
                      " channel(s) but IPD mode '" +
                      std::string(IpdModeName(topology.ipd_mode)) + "' needs 2");
    ex.ref1 = ReadWav(r.src1_path).channel(0);
    ex.ref2 = ReadWav(r.src2_path).channel(0);
    AudioSignal adapt = ReadWav(r.adapt_path);
    ex.adaptation = adapt.channel(0);
    const int64_t n = ex.mixture.num_samples();
    if (static_cast<int64_t>(ex.ref1.size()) != n || static_cast<int64_t>(ex.ref2.size()) != n)
      throw DataError("mixture " + r.mixture_id + ": source length differs from mixture");
    if (!out.empty() && (ex.mixture.sample_rate != out.front().mixture.sample_rate ||
                         adapt.sample_rate != ex.mixture.sample_rate))
      throw DataError("mixture " + r.mixture_id + ": sample rate differs from the rest");
    auto it = std::lower_bound(speakers.begin(), speakers.end(), r.target_spk);
    ex.label = (it != speakers.end() && *it == r.target_spk)
                   ? static_cast<int>(it - speakers.begin())
                   : -1;
    out.push_back(std::move(ex));
  }
  return out;
}

std::string MetricsPath(const std::string &out_path) { return out_path + ".metrics.tsv"; }
std::string ResumePath(const std::string &out_path) { return out_path + ".resume"; }

double MeanSiSnr(const Model &model, const std::vector<TrainingExample> &examples) {
  if (examples.empty()) throw DataError("no examples to score");
  NoGradGuard no_grad;
  const TopologyConfig &topo = model.topology();
  double sum = 0.0;
  for (const auto &ex : examples) {
    ModelInput in = PrepareInput(ex.mixture, topo);
    if (topo.kind == ModelKind::kTasNet) {
      SeparateOutput s = model.Separate(in.waveform, in.ipd);
      const auto e1 = s.estimate1.data(), e2 = s.estimate2.data();
      const double keep = SiSnrDb(ex.ref1, e1) + SiSnrDb(ex.ref2, e2);
      const double swap = SiSnrDb(ex.ref1, e2) + SiSnrDb(ex.ref2, e1);
      sum += 0.5 * std::max(keep, swap);
    } else {
      ExtractOutput o = model.Extract(in.waveform, WaveformTensor(ex.adaptation), in.ipd);
      sum += SiSnrDb(ex.ref1, o.estimate.data());
    }
  }
  return sum / static_cast<double>(examples.size());
}

double SpeakerAccuracy(const Model &model, const std::vector<TrainingExample> &examples) {
  if (model.topology().kind != ModelKind::kSpeakerBeam || model.topology().num_speakers == 0)
    throw UsageError("speaker accuracy needs an extraction model with a speaker-ID head");
  NoGradGuard no_grad;
  int correct = 0, total = 0;
  for (const auto &ex : examples) {
    if (ex.label < 0) continue;
    const auto logits =
        SpeakerLogits(model.AuxEmbed(WaveformTensor(ex.adaptation)), model.speaker_projection());
    const int best =
        static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    correct += best == ex.label;
    ++total;
  }
  if (total == 0) throw DataError("no labelled examples for speaker accuracy");
  return static_cast<double>(correct) / total;
}

namespace {

constexpr char kHistoryRecord[] = "state/history";
constexpr char kBestEpochRecord[] = "state/best_epoch";
constexpr char kBestPrefix[] = "best/";
constexpr char kFirstMomentPrefix[] = "adam.m/";
constexpr char kSecondMomentPrefix[] = "adam.v/";

struct Crop {
  AudioSignal mixture;
  std::vector<double> ref1, ref2, adaptation;
};

std::vector<double> Window(const std::vector<double> &x, int64_t offset, int64_t len) {
  return {x.begin() + offset, x.begin() + offset + len};
}

int64_t DrawOffset(int64_t total, int64_t len, std::mt19937_64 &rng) {
  if (total <= len) return 0;
  return std::uniform_int_distribution<int64_t>(0, total - len)(rng);
}

// Random fixed-length crop. Crops that catch a reference in silence are
// redrawn a few times, since SiSNR is undefined for a silent reference.
Crop DrawCrop(const TrainingExample &ex, int64_t segment, bool need_ref2,
              std::mt19937_64 &rng) {
  const int64_t n = ex.mixture.num_samples();
  const int64_t len = std::min(n, segment);
  const double floor1 = 1e-4 * Power(ex.ref1);
  const double floor2 = 1e-4 * Power(ex.ref2);
  int64_t offset = 0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    offset = DrawOffset(n, len, rng);
    if (Power(Window(ex.ref1, offset, len)) > floor1 &&
        (!need_ref2 || Power(Window(ex.ref2, offset, len)) > floor2))
      break;
  }
  Crop c;
  c.mixture.sample_rate = ex.mixture.sample_rate;
  for (const auto &ch : ex.mixture.channels) c.mixture.channels.push_back(Window(ch, offset, len));
  c.ref1 = Window(ex.ref1, offset, len);
  c.ref2 = Window(ex.ref2, offset, len);
  const int64_t alen = std::min<int64_t>(static_cast<int64_t>(ex.adaptation.size()), segment);
  c.adaptation = Window(ex.adaptation, DrawOffset(ex.adaptation.size(), alen, rng), alen);
  return c;
}

std::string SerializeRng(const std::mt19937_64 &rng) {
  std::ostringstream ss;
  ss << rng;
  return ss.str();
}

void WriteMetrics(const std::string &path, const std::vector<EpochMetrics> &history) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw DataError("cannot write metrics log " + path);
    out << "#epoch\tloss\tsisnr\tce\n";
    char buf[128];
    for (const auto &m : history) {
      std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.17g\t%.17g\n", m.epoch, m.loss,
                    m.sisnr_db, m.cross_entropy);
      out << buf;
    }
  }
  std::filesystem::rename(tmp, path);
}

void AppendMoments(Checkpoint &ckpt, const ParamSet &params,
                   const std::vector<std::vector<double>> &moments,
                   const std::string &prefix) {
  const auto &items = params.items();
  for (size_t i = 0; i < items.size(); ++i)
    ckpt.records.push_back({prefix + items[i].first, items[i].second.shape(), moments[i]});
}

void RestoreMoments(const Checkpoint &ckpt, const ParamSet &params,
                    std::vector<std::vector<double>> &moments, const std::string &prefix) {
  const auto &items = params.items();
  for (size_t i = 0; i < items.size(); ++i) {
    const CheckpointRecord *r = ckpt.Find(prefix + items[i].first);
    if (!r || r->data.size() != moments[i].size())
      throw DataError("resume state lacks optimizer moments for " + items[i].first);
    moments[i] = r->data;
  }
}

class TrainingRun {
 public:
  TrainingRun(const std::vector<MixtureRecord> &records, const TrainConfig &cfg,
              const TrainOptions &options)
      : cfg_(cfg), options_(options) {
    if (records.empty()) throw DataError("training manifest is empty");
    if (options_.out_path.empty()) throw UsageError("training needs an output path");
    speakers_ = SpeakerLabels(records);
    cfg_.topology.Normalize();
    cfg_.topology.num_speakers =
        cfg_.topology.kind == ModelKind::kSpeakerBeam ? static_cast<int>(speakers_.size()) : 0;
    cfg_.topology.Validate();

    auto examples = LoadExamples(records, cfg_.topology, speakers_);
    sample_rate_ = examples.front().mixture.sample_rate;
    cfg_.Validate(sample_rate_);
    SplitValidation(std::move(examples));

    model_ = std::make_unique<Model>(cfg_.topology, cfg_.seed);
    best_ = std::make_unique<Model>(cfg_.topology, cfg_.seed);
    adam_ = std::make_unique<Adam>(model_->params());
    std::seed_seq train_seq{cfg_.seed, uint64_t{1}};
    rng_.seed(train_seq);
    lr_ = cfg_.lr;
  }

  TrainResult Run() {
    if (options_.resume) LoadState();
    if (cfg_.topology.kind == ModelKind::kPassthrough) {
      SaveBest();
      return Result();
    }
    const int64_t segment = cfg_.SegmentSamples(sample_rate_);
    for (int epoch = epoch_ + 1; epoch <= cfg_.max_epochs; ++epoch) {
      EpochMetrics m = RunEpoch(epoch, segment);
      if (epoch % cfg_.eval_every == 0 || epoch == cfg_.max_epochs) Validate(m);
      history_.push_back(m);
      epoch_ = epoch;
      WriteMetrics(MetricsPath(options_.out_path), history_);
      SaveState();
      if (options_.on_epoch) options_.on_epoch(m);
    }
    if (best_epoch_ == 0) SaveBest();
    return Result();
  }

 private:
  void SplitValidation(std::vector<TrainingExample> examples) {
    std::vector<size_t> idx(examples.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::seed_seq split_seq{cfg_.seed, uint64_t{2}};
    std::mt19937_64 split_rng(split_seq);
    std::shuffle(idx.begin(), idx.end(), split_rng);
    const size_t n_valid =
        static_cast<size_t>(std::floor(cfg_.valid_fraction * static_cast<double>(idx.size())));
    if (n_valid >= idx.size()) throw UsageError("valid_fraction leaves no training data");
    std::vector<bool> is_valid(idx.size(), false);
    for (size_t i = 0; i < n_valid; ++i) is_valid[idx[i]] = true;
    for (size_t i = 0; i < examples.size(); ++i)
      (is_valid[i] ? valid_ : train_).push_back(std::move(examples[i]));
  }

  LossReport ExampleLoss(const TrainingExample &ex, const Crop &crop) {
    ModelInput in = PrepareInput(crop.mixture, cfg_.topology);
    if (cfg_.topology.kind == ModelKind::kTasNet) {
      SeparateOutput s = model_->Separate(in.waveform, in.ipd);
      return PitLoss(WaveformTensor(crop.ref1), WaveformTensor(crop.ref2), s.estimate1,
                     s.estimate2);
    }
    ExtractOutput o = model_->Extract(in.waveform, WaveformTensor(crop.adaptation), in.ipd);
    return MultitaskLoss(WaveformTensor(crop.ref1), o.estimate, o.embedding,
                         model_->speaker_projection(), ex.label, cfg_.alpha);
  }

  EpochMetrics RunEpoch(int epoch, int64_t segment) {
    std::vector<size_t> order(train_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng_);
    const bool pit = cfg_.topology.kind == ModelKind::kTasNet;
    ParamSet &params = model_->params();

    EpochMetrics m;
    m.epoch = epoch;
    for (size_t start = 0; start < order.size(); start += cfg_.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg_.batch_size);
      params.ZeroGrad();
      for (size_t k = start; k < stop; ++k) {
        const TrainingExample &ex = train_[order[k]];
        Crop crop = DrawCrop(ex, segment, pit, rng_);
        LossReport rep = ExampleLoss(ex, crop);
        const double loss = rep.total.item();
        if (!std::isfinite(loss))
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                             " on mixture " + ex.mixture_id);
        Backward(rep.total);
        m.loss += loss;
        m.sisnr_db += rep.sisnr_db;
        m.cross_entropy += rep.cross_entropy;
      }
      ScaleGradients(params, 1.0 / static_cast<double>(stop - start));
      ClipGradNorm(params, cfg_.clip_norm);
      adam_->Step(lr_);
      for (const auto &[name, p] : params.items())
        for (double v : p.data())
          if (!std::isfinite(v))
            throw NumericError("parameter " + name + " became non-finite at epoch " +
                               std::to_string(epoch) + " (batch ending with mixture " +
                               train_[order[stop - 1]].mixture_id + ")");
    }
    params.ZeroGrad();
    const double n = static_cast<double>(order.size());
    m.loss /= n;
    m.sisnr_db /= n;
    m.cross_entropy /= n;
    return m;
  }

  void Validate(const EpochMetrics &m) {
    const double score = valid_.empty() ? m.sisnr_db : MeanSiSnr(*model_, valid_);
    if (best_epoch_ == 0 || score > best_score_) {
      best_score_ = score;
      best_epoch_ = m.epoch;
      epochs_since_best_ = 0;
      best_->params().CopyValuesFrom(model_->params());
      SaveBest();
    } else if (++epochs_since_best_ >= cfg_.lr_patience) {
      lr_ *= cfg_.lr_decay;
      epochs_since_best_ = 0;
    }
  }

  CheckpointMeta Meta() const {
    CheckpointMeta meta;
    meta.alpha = cfg_.alpha;
    meta.epoch = epoch_;
    meta.step = adam_->step_count();
    meta.learning_rate = lr_;
    meta.best_score = best_score_;
    meta.epochs_since_best = epochs_since_best_;
    meta.speakers = speakers_;
    return meta;
  }

  void SaveBest() {
    CheckpointMeta meta = Meta();
    meta.epoch = best_epoch_;
    SaveCheckpoint(options_.out_path, MakeCheckpoint(*best_, meta));
  }

  void SaveState() {
    Checkpoint c;
    c.topology = cfg_.topology;
    c.meta = Meta();
    c.meta.rng_state = SerializeRng(rng_);
    AppendParams(c, model_->params());
    AppendParams(c, best_->params(), kBestPrefix);
    AppendMoments(c, model_->params(), adam_->first_moments(), kFirstMomentPrefix);
    AppendMoments(c, model_->params(), adam_->second_moments(), kSecondMomentPrefix);
    CheckpointRecord hist{kHistoryRecord, {static_cast<int>(history_.size()), 4}, {}};
    for (const auto &h : history_)
      hist.data.insert(hist.data.end(), {static_cast<double>(h.epoch), h.loss, h.sisnr_db,
                                         h.cross_entropy});
    if (!history_.empty()) c.records.push_back(std::move(hist));
    c.records.push_back({kBestEpochRecord, {1}, {static_cast<double>(best_epoch_)}});
    SaveCheckpoint(ResumePath(options_.out_path), c);
  }

  void LoadState() {
    const Checkpoint c = LoadCheckpoint(ResumePath(options_.out_path));
    if (!(c.topology == cfg_.topology))
      throw UsageError("resume state was written for a different topology");
    if (c.meta.speakers != speakers_)
      throw DataError("resume state was written for a different speaker set");
    RestoreParams(c, model_->params());
    RestoreParams(c, best_->params(), kBestPrefix);
    RestoreMoments(c, model_->params(), adam_->first_moments(), kFirstMomentPrefix);
    RestoreMoments(c, model_->params(), adam_->second_moments(), kSecondMomentPrefix);
    adam_->set_step_count(c.meta.step);
    epoch_ = c.meta.epoch;
    lr_ = c.meta.learning_rate;
    best_score_ = c.meta.best_score;
    epochs_since_best_ = c.meta.epochs_since_best;
    std::istringstream rs(c.meta.rng_state);
    rs >> rng_;
    if (!rs) throw DataError("resume state has a corrupt random-generator state");
    const CheckpointRecord *be = c.Find(kBestEpochRecord);
    if (!be || be->data.size() != 1) throw DataError("resume state lacks the best epoch");
    best_epoch_ = static_cast<int>(be->data[0]);
    history_.clear();
    if (const CheckpointRecord *h = c.Find(kHistoryRecord)) {
      for (size_t i = 0; i + 3 < h->data.size(); i += 4)
        history_.push_back({static_cast<int>(h->data[i]), h->data[i + 1], h->data[i + 2],
                            h->data[i + 3]});
    }
  }

  TrainResult Result() const {
    TrainResult r;
    r.history = history_;
    r.best_score = best_score_;
    r.best_epoch = best_epoch_;
    r.speakers = speakers_;
    return r;
  }

  TrainConfig cfg_;
  TrainOptions options_;
  std::vector<std::string> speakers_;
  std::vector<TrainingExample> train_, valid_;
  int sample_rate_ = kDefaultSampleRate;
  std::unique_ptr<Model> model_, best_;
  std::unique_ptr<Adam> adam_;
  std::mt19937_64 rng_;
  double lr_ = 0.0;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_score_ = 0.0;
  int epochs_since_best_ = 0;
  std::vector<EpochMetrics> history_;
};

}  // namespace

TrainResult Train(const std::vector<MixtureRecord> &records, const TrainConfig &cfg,
                  const TrainOptions &options) {
  TrainingRun run(records, cfg, options);
  return run.Run();
}

}  // namespace tdsb
