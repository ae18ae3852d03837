// src/corpus/corpus.cc

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

#include "tdsb/corpus/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "tdsb/dsp/wav.h"
#include "tdsb/util/error.h"

namespace tdsb {
namespace fs = std::filesystem;

namespace {

// Stream tags keep the random streams of different purposes independent.
enum Stream : uint32_t {
  kProfileStream = 1,
  kUtteranceStream = 2,
  kDurationStream = 3,
  kTrainPlanStream = 4,
  kTestPlanStream = 5,
};

std::mt19937_64 MakeRng(std::initializer_list<uint64_t> parts) {
  std::vector<uint32_t> words;
  for (uint64_t p : parts) {
    words.push_back(static_cast<uint32_t>(p));
    words.push_back(static_cast<uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

double Uniform(std::mt19937_64 &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int UniformInt(std::mt19937_64 &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Sum of Lorentzian resonances, in [0, 3].
double FormantGain(double f, const std::array<double, 3> &centers,
                   const std::array<double, 3> &bandwidths) {
  double g = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double x = (f - centers[i]) / (0.5 * bandwidths[i]);
    g += 1.0 / (1.0 + x * x);
  }
  return g;
}

SpeakerFamily FamilyOf(int index) {
  return index % 2 == 0 ? SpeakerFamily::kA : SpeakerFamily::kB;
}

}  // namespace

std::string SpeakerId(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%04d", index);
  return buf;
}

SyntheticSpeaker MakeSpeaker(int index) {
  if (index < 0) throw UsageError("speaker index must be >= 0");
  auto rng = MakeRng({kProfileStream, static_cast<uint64_t>(index)});
  SyntheticSpeaker s;
  s.index = index;
  s.speaker_id = SpeakerId(index);
  s.family = FamilyOf(index);
  const auto &range = s.family == SpeakerFamily::kA ? kFamilyAF0 : kFamilyBF0;
  s.f0_hz = Uniform(rng, range[0], range[1]);
  const double shift = s.family == SpeakerFamily::kA ? 1.0 : 1.1;
  s.formant_hz = {Uniform(rng, 600, 900) * shift, Uniform(rng, 1100, 1900) * shift,
                  Uniform(rng, 2300, 3100) * shift};
  s.bandwidth_hz = {Uniform(rng, 60, 120), Uniform(rng, 90, 160),
                    Uniform(rng, 120, 220)};
  s.vibrato_rate_hz = Uniform(rng, 4.0, 7.0);
  s.vibrato_depth = Uniform(rng, 0.005, 0.015);
  s.spectral_tilt = Uniform(rng, 1.3, 1.7);
  return s;
}

AudioSignal SynthUtterance(const SyntheticSpeaker &spk, uint64_t seed,
                           double duration_s, int sample_rate) {
  if (!(duration_s >= 0.5 && duration_s <= 4.0))
    throw UsageError("utterance duration must be in [0.5, 4] s");
  if (sample_rate < 8000) throw UsageError("sample rate must be >= 8000 Hz");
  auto rng = MakeRng({kUtteranceStream, static_cast<uint64_t>(spk.index), seed});
  const int total = static_cast<int>(std::lround(duration_s * sample_rate));
  const double fs = sample_rate;
  const int num_segments = UniformInt(rng, 3, 8);

  // Silence before each segment and after the last one: at most ~30% of
  // the utterance in total.
  std::vector<int> gaps(num_segments + 1);
  const double gap_unit = 0.3 * total / (num_segments + 1);
  int gap_total = 0;
  for (int &g : gaps) {
    g = static_cast<int>(Uniform(rng, 0.3, 1.0) * gap_unit);
    gap_total += g;
  }
  std::vector<double> weights(num_segments);
  double wsum = 0.0;
  for (double &w : weights) wsum += (w = Uniform(rng, 0.5, 1.5));

  std::vector<double> out(total, 0.0);
  const int voiced = total - gap_total;
  int pos = 0, used = 0;
  for (int s = 0; s < num_segments; ++s) {
    pos += gaps[s];
    const int len = s + 1 == num_segments
                        ? voiced - used
                        : static_cast<int>(voiced * weights[s] / wsum);
    used += len;

    std::array<double, 3> formants = spk.formant_hz;
    for (double &f : formants) f *= Uniform(rng, 0.85, 1.15);
    const double glide_start = Uniform(rng, -0.04, 0.04);
    const double glide_end = Uniform(rng, -0.04, 0.04);
    const double vib_phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double am_rate = Uniform(rng, 2.0, 4.0);
    const double am_phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double seg_f0 = spk.f0_hz * (1.0 + 0.5 * (glide_start + glide_end));
    const int num_harmonics =
        std::max(1, static_cast<int>(0.475 * fs / (seg_f0 * 1.1)));
    std::vector<double> amp(num_harmonics), phase0(num_harmonics);
    for (int k = 1; k <= num_harmonics; ++k) {
      const double g = FormantGain(k * seg_f0, formants, spk.bandwidth_hz);
      amp[k - 1] = (0.5 + 0.45 * g) * std::pow(k, -spk.spectral_tilt);
      phase0[k - 1] = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
    }

    const int ramp = std::max(1, std::min(len / 4, static_cast<int>(0.02 * fs)));
    double phase = 0.0;
    for (int n = 0; n < len && pos + n < total; ++n) {
      const double t = n / fs;
      const double frac = len > 1 ? static_cast<double>(n) / (len - 1) : 0.0;
      const double f0 =
          spk.f0_hz * (1.0 + glide_start + (glide_end - glide_start) * frac) *
          (1.0 + spk.vibrato_depth *
                     std::sin(2.0 * std::numbers::pi * spk.vibrato_rate_hz * t +
                              vib_phase));
      phase += 2.0 * std::numbers::pi * f0 / fs;
      double v = 0.0;
      for (int k = 1; k <= num_harmonics; ++k) {
        if (k * f0 >= 0.49 * fs) break;
        v += amp[k - 1] * std::sin(k * phase + phase0[k - 1]);
      }
      double env = 1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * am_rate * t + am_phase);
      if (n < ramp) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * n / ramp);
      if (len - 1 - n < ramp)
        env *= 0.5 - 0.5 * std::cos(std::numbers::pi * (len - 1 - n) / ramp);
      out[pos + n] = v * env;
    }
    pos += len;
  }

  const double rms = Rms(out);
  for (double &v : out) v *= kUtteranceRms / rms;
  return AudioSignal::Mono(std::move(out), sample_rate);
}

std::string PairTypeName(PairType t) {
  switch (t) {
    case PairType::kAA: return "AA";
    case PairType::kBB: return "BB";
    case PairType::kAB: return "AB";
  }
  return "?";
}

PairType ParsePairType(const std::string &s) {
  if (s == "AA") return PairType::kAA;
  if (s == "BB") return PairType::kBB;
  if (s == "AB") return PairType::kAB;
  throw DataError("unknown pair type '" + s + "'");
}

PairType PairTypeOf(SpeakerFamily target, SpeakerFamily interferer) {
  if (target != interferer) return PairType::kAB;
  return target == SpeakerFamily::kA ? PairType::kAA : PairType::kBB;
}

// ----- manifest -----

namespace {

constexpr const char *kFields[] = {
    "mixture_id", "mixture_path", "src1_path", "src2_path", "adapt_path",
    "target_spk", "interferer_spk", "snr_db", "pair_type", "delay1", "delay2"};
constexpr int kNumFields = 11;

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string Resolve(const fs::path &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace

std::string ManifestHeader() {
  std::string h = "#";
  for (int i = 0; i < kNumFields; ++i) {
    if (i) h += '\t';
    h += kFields[i];
  }
  return h;
}

void WriteManifest(const std::string &path,
                   const std::vector<MixtureRecord> &records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path);
  out << ManifestHeader() << '\n';
  char snr[32];
  for (const auto &r : records) {
    std::snprintf(snr, sizeof(snr), "%.17g", r.snr_db);
    out << r.mixture_id << '\t' << r.mixture_path << '\t' << r.src1_path << '\t'
        << r.src2_path << '\t' << r.adapt_path << '\t' << r.target_spk << '\t'
        << r.interferer_spk << '\t' << snr << '\t' << PairTypeName(r.pair_type)
        << '\t' << r.delay1 << '\t' << r.delay2 << '\n';
  }
  if (!out) throw DataError("write failed for manifest " + path);
}

std::vector<MixtureRecord> ReadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<MixtureRecord> records;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string &msg) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = SplitTabs(line);
    if (static_cast<int>(f.size()) != kNumFields)
      fail("expected " + std::to_string(kNumFields) + " tab-separated fields, got " +
           std::to_string(f.size()));
    MixtureRecord r;
    r.mixture_id = f[0];
    r.mixture_path = Resolve(base, f[1]);
    r.src1_path = Resolve(base, f[2]);
    r.src2_path = Resolve(base, f[3]);
    r.adapt_path = Resolve(base, f[4]);
    r.target_spk = f[5];
    r.interferer_spk = f[6];
    try {
      size_t used = 0;
      r.snr_db = std::stod(f[7], &used);
      if (used != f[7].size()) fail("bad snr_db '" + f[7] + "'");
      r.pair_type = ParsePairType(f[8]);
      r.delay1 = std::stoi(f[9]);
      r.delay2 = std::stoi(f[10]);
    } catch (const DataError &) {
      throw;
    } catch (const std::exception &) {
      fail("malformed numeric field");
    }
    if (r.mixture_id.empty()) fail("empty mixture_id");
    records.push_back(std::move(r));
  }
  if (records.empty()) throw DataError("manifest " + path + " has no records");
  return records;
}

// ----- corpus planning -----

int CorpusConfig::ResolvedTestSpeakers() const {
  if (num_test_speakers > 0) return num_test_speakers;
  int n = std::max(2, num_speakers / 4);
  return n + (n % 2);
}

void CorpusConfig::Validate() const {
  if (num_speakers < 4)
    throw UsageError("insufficient speakers: need at least 4, got " +
                     std::to_string(num_speakers));
  const int test = ResolvedTestSpeakers();
  if (num_speakers - test < 2)
    throw UsageError("insufficient speakers: " + std::to_string(num_speakers) +
                     " leaves fewer than 2 training speakers after " +
                     std::to_string(test) + " test speakers");
  if (test < 2) throw UsageError("need at least 2 test speakers");
  if (num_train_mixtures < 1 || num_test_mixtures < 0)
    throw UsageError("mixture counts must be positive");
  if (utterances_per_speaker < 2)
    throw UsageError("need at least 2 utterances per speaker");
  if (channels != 1 && channels != 2) throw UsageError("channels must be 1 or 2");
  if (max_delay < 0) throw UsageError("max_delay must be >= 0");
  if (!(min_utterance_s >= 0.5 && max_utterance_s <= 4.0 &&
        min_utterance_s <= max_utterance_s))
    throw UsageError("utterance durations must lie in [0.5, 4] s");
  if (!(min_snr_db <= max_snr_db)) throw UsageError("min_snr_db > max_snr_db");
}

namespace {

std::vector<MixtureSpec> PlanSplit(const CorpusConfig &cfg,
                                   const std::vector<int> &speakers, int count,
                                   bool is_test, std::mt19937_64 rng) {
  std::vector<int> fam_a, fam_b;
  for (int s : speakers) (FamilyOf(s) == SpeakerFamily::kA ? fam_a : fam_b).push_back(s);
  std::vector<PairType> feasible;
  if (fam_a.size() >= 2) feasible.push_back(PairType::kAA);
  if (fam_b.size() >= 2) feasible.push_back(PairType::kBB);
  if (!fam_a.empty() && !fam_b.empty()) feasible.push_back(PairType::kAB);
  if (feasible.empty())
    throw UsageError("insufficient speakers to form any mixture");

  auto pick = [&](const std::vector<int> &from) {
    return from[UniformInt(rng, 0, static_cast<int>(from.size()) - 1)];
  };
  std::vector<MixtureSpec> out;
  for (int i = 0; i < count; ++i) {
    MixtureSpec m;
    char id[32];
    std::snprintf(id, sizeof(id), "%s%05d", is_test ? "test" : "train", i);
    m.mixture_id = id;
    m.is_test = is_test;
    m.pair_type = feasible[i % feasible.size()];
    if (m.pair_type == PairType::kAB) {
      const bool a_first = UniformInt(rng, 0, 1) == 0;
      m.target = pick(a_first ? fam_a : fam_b);
      m.interferer = pick(a_first ? fam_b : fam_a);
    } else {
      const auto &fam = m.pair_type == PairType::kAA ? fam_a : fam_b;
      m.target = pick(fam);
      do m.interferer = pick(fam);
      while (m.interferer == m.target);
    }
    const int u = cfg.utterances_per_speaker;
    m.target_utt = UniformInt(rng, 0, u - 1);
    m.adapt_utt = (m.target_utt + UniformInt(rng, 1, u - 1)) % u;
    m.interferer_utt = UniformInt(rng, 0, u - 1);
    m.snr_db = Uniform(rng, cfg.min_snr_db, cfg.max_snr_db);
    if (cfg.channels == 2) {
      m.delay1 = UniformInt(rng, 0, cfg.max_delay);
      do m.delay2 = UniformInt(rng, 0, cfg.max_delay);
      while (cfg.max_delay > 0 && m.delay2 == m.delay1);
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace

CorpusPlan PlanCorpus(const CorpusConfig &cfg) {
  cfg.Validate();
  CorpusPlan plan;
  const int n_test = cfg.ResolvedTestSpeakers();
  for (int i = 0; i < cfg.num_speakers - n_test; ++i) plan.train_speakers.push_back(i);
  for (int i = 0; i < n_test; ++i) plan.test_speakers.push_back(kTestSpeakerBase + i);
  plan.train = PlanSplit(cfg, plan.train_speakers, cfg.num_train_mixtures, false,
                         MakeRng({kTrainPlanStream, cfg.seed,
                                  static_cast<uint64_t>(cfg.num_speakers)}));
  plan.test = PlanSplit(cfg, plan.test_speakers, cfg.num_test_mixtures, true,
                        MakeRng({kTestPlanStream, cfg.seed,
                                 static_cast<uint64_t>(n_test)}));
  return plan;
}

AudioSignal RenderUtterance(const CorpusConfig &cfg, int index, int utt) {
  auto rng = MakeRng({kDurationStream, cfg.seed, static_cast<uint64_t>(index),
                      static_cast<uint64_t>(utt)});
  const double dur = Uniform(rng, cfg.min_utterance_s, cfg.max_utterance_s);
  const uint64_t seed = (cfg.seed << 16) ^ static_cast<uint64_t>(utt);
  return SynthUtterance(MakeSpeaker(index), seed, dur, cfg.sample_rate);
}

MixResult RenderMixture(const CorpusConfig &cfg, const MixtureSpec &spec) {
  return MixAtSnr(RenderUtterance(cfg, spec.target, spec.target_utt),
                  RenderUtterance(cfg, spec.interferer, spec.interferer_utt),
                  spec.snr_db, cfg.channels, spec.delay1, spec.delay2);
}

std::vector<CorpusSummaryRow> BuildCorpus(const CorpusConfig &cfg,
                                          const std::string &dir) {
  const CorpusPlan plan = PlanCorpus(cfg);
  const fs::path root(dir);
  std::error_code ec;
  for (const char *sub : {"wav/utt", "wav/train", "wav/test"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw DataError("cannot create " + (root / sub).string() + ": " + ec.message());
  }

  std::map<std::pair<int, int>, std::string> written_utts;
  auto utt_path = [&](int spk, int utt) {
    auto key = std::make_pair(spk, utt);
    auto it = written_utts.find(key);
    if (it != written_utts.end()) return it->second;
    char name[64];
    std::snprintf(name, sizeof(name), "wav/utt/%s_u%02d.wav", SpeakerId(spk).c_str(), utt);
    WriteWav((root / name).string(), RenderUtterance(cfg, spk, utt));
    return written_utts[key] = name;
  };

  std::vector<CorpusSummaryRow> summary;
  for (int split = 0; split < 2; ++split) {
    const bool test = split == 1;
    const auto &specs = test ? plan.test : plan.train;
    const auto &speakers = test ? plan.test_speakers : plan.train_speakers;
    const std::string sub = test ? "wav/test/" : "wav/train/";
    CorpusSummaryRow row;
    row.split = test ? "test" : "train";
    for (int s : speakers)
      ++(FamilyOf(s) == SpeakerFamily::kA ? row.speakers_a : row.speakers_b);
    std::vector<MixtureRecord> records;
    for (const auto &spec : specs) {
      MixResult mix = RenderMixture(cfg, spec);
      MixtureRecord r;
      r.mixture_id = spec.mixture_id;
      r.mixture_path = sub + spec.mixture_id + "_mix.wav";
      r.src1_path = sub + spec.mixture_id + "_src1.wav";
      r.src2_path = sub + spec.mixture_id + "_src2.wav";
      WriteWav((root / r.mixture_path).string(), mix.mixture);
      WriteWav((root / r.src1_path).string(), mix.ref1);
      WriteWav((root / r.src2_path).string(), mix.ref2);
      r.adapt_path = utt_path(spec.target, spec.adapt_utt);
      r.target_spk = SpeakerId(spec.target);
      r.interferer_spk = SpeakerId(spec.interferer);
      r.snr_db = spec.snr_db;
      r.pair_type = spec.pair_type;
      r.delay1 = spec.delay1;
      r.delay2 = spec.delay2;
      records.push_back(std::move(r));
      switch (spec.pair_type) {
        case PairType::kAA: ++row.mixtures_aa; break;
        case PairType::kBB: ++row.mixtures_bb; break;
        case PairType::kAB: ++row.mixtures_ab; break;
      }
    }
    if (!records.empty() || !test)
      WriteManifest((root / (row.split + ".tsv")).string(), records);
    summary.push_back(row);
  }
  return summary;
}

}  // namespace tdsb
