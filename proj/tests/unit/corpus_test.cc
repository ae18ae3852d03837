// tests/unit/corpus_test.cc

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
#include <set>

#include "doctest.h"
#include "tdsb/corpus/corpus.h"
#include "tdsb/dsp/stft.h"
#include "tdsb/dsp/wav.h"
#include "tdsb/util/error.h"

using namespace tdsb;
namespace fs = std::filesystem;

namespace {

// Frequency of the largest bin of the frame-averaged power spectrum.
double DominantPeakHz(const AudioSignal &x) {
  const int frame = 1024;
  Spectrogram s = Stft(x, frame, frame / 2);
  std::vector<double> power(s.num_bins, 0.0);
  for (int t = 0; t < s.num_frames; ++t)
    for (int f = 0; f < s.num_bins; ++f) power[f] += std::norm(s.at(0, t, f));
  const int best = static_cast<int>(std::max_element(power.begin(), power.end()) -
                                    power.begin());
  return best * static_cast<double>(x.sample_rate) / frame;
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path ScratchDir(const std::string &name) {
  fs::path p = fs::temp_directory_path() / ("tdsb_corpus_test_" + name);
  fs::remove_all(p);
  return p;
}

CorpusConfig SmallConfig() {
  CorpusConfig c;
  c.num_speakers = 8;
  c.num_train_mixtures = 12;
  c.num_test_mixtures = 6;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("speaker profiles follow their family ranges") {
  for (int i = 0; i < 40; ++i) {
    SyntheticSpeaker s = MakeSpeaker(i);
    if (s.family == SpeakerFamily::kA) {
      CHECK(s.f0_hz >= 90.0);
      CHECK(s.f0_hz <= 140.0);
    } else {
      CHECK(s.f0_hz >= 170.0);
      CHECK(s.f0_hz <= 250.0);
    }
    CHECK(s.family == (i % 2 == 0 ? SpeakerFamily::kA : SpeakerFamily::kB));
    CHECK(MakeSpeaker(i).f0_hz == s.f0_hz);
  }
  CHECK(MakeSpeaker(7).speaker_id == "spk0007");
}

TEST_CASE("utterance synthesis is deterministic and normalized") {
  SyntheticSpeaker s = MakeSpeaker(3);
  AudioSignal a = SynthUtterance(s, 11, 1.3);
  AudioSignal b = SynthUtterance(s, 11, 1.3);
  AudioSignal c = SynthUtterance(s, 12, 1.3);
  CHECK(a.channels == b.channels);
  CHECK(a.channels != c.channels);
  CHECK(a.num_samples() == 10400);
  for (double d : {0.5, 1.0, 2.7, 4.0}) {
    AudioSignal u = SynthUtterance(MakeSpeaker(4), 1, d);
    CHECK(std::abs(Rms(u.channel(0)) - kUtteranceRms) < 1e-9);
  }
  CHECK_THROWS_AS(SynthUtterance(s, 1, 0.4), UsageError);
  CHECK_THROWS_AS(SynthUtterance(s, 1, 4.5), UsageError);
}

TEST_CASE("family A spectral peaks lie below family B peaks") {
  double max_a = 0.0, min_b = 1e9;
  for (int spk = 0; spk < 12; ++spk) {
    for (uint64_t seed = 0; seed < 3; ++seed) {
      const double peak = DominantPeakHz(SynthUtterance(MakeSpeaker(spk), seed, 1.5));
      if (spk % 2 == 0)
        max_a = std::max(max_a, peak);
      else
        min_b = std::min(min_b, peak);
    }
  }
  CAPTURE(max_a);
  CAPTURE(min_b);
  CHECK(max_a < min_b);
}

TEST_CASE("corpus plan splits and pairs") {
  CorpusConfig cfg = SmallConfig();
  CorpusPlan plan = PlanCorpus(cfg);
  std::set<int> train(plan.train_speakers.begin(), plan.train_speakers.end());
  for (int s : plan.test_speakers) CHECK(train.count(s) == 0);
  CHECK(plan.test_speakers.size() == 2);
  CHECK(plan.train.size() == 12);
  CHECK(plan.test.size() == 6);
  for (const auto *split : {&plan.train, &plan.test}) {
    for (const auto &m : *split) {
      CHECK(m.adapt_utt != m.target_utt);
      CHECK(m.target != m.interferer);
      CHECK(m.pair_type ==
            PairTypeOf(MakeSpeaker(m.target).family, MakeSpeaker(m.interferer).family));
      CHECK(m.snr_db >= -5.0);
      CHECK(m.snr_db <= 5.0);
      const auto &pool = m.is_test ? plan.test_speakers : plan.train_speakers;
      CHECK(std::count(pool.begin(), pool.end(), m.target) == 1);
      CHECK(std::count(pool.begin(), pool.end(), m.interferer) == 1);
    }
  }
  std::set<PairType> types;
  for (const auto &m : plan.train) types.insert(m.pair_type);
  CHECK(types.size() == 3);

  CorpusConfig four = cfg;
  four.num_speakers = 4;
  CorpusPlan p4 = PlanCorpus(four);
  std::set<int> t4(p4.train_speakers.begin(), p4.train_speakers.end());
  for (int s : p4.test_speakers) CHECK(t4.count(s) == 0);

  CorpusConfig three = cfg;
  three.num_speakers = 3;
  CHECK_THROWS_AS(PlanCorpus(three), UsageError);
}

TEST_CASE("test split is shared across training-speaker counts") {
  CorpusConfig a = SmallConfig(), b = SmallConfig();
  a.num_test_speakers = b.num_test_speakers = 4;
  a.num_speakers = 12;
  b.num_speakers = 36;
  CorpusPlan pa = PlanCorpus(a), pb = PlanCorpus(b);
  CHECK(pa.test_speakers == pb.test_speakers);
  REQUIRE(pa.test.size() == pb.test.size());
  for (size_t i = 0; i < pa.test.size(); ++i) {
    CHECK(pa.test[i].target == pb.test[i].target);
    CHECK(pa.test[i].snr_db == pb.test[i].snr_db);
  }
}

TEST_CASE("rendered mixtures match their SNR") {
  CorpusConfig cfg = SmallConfig();
  cfg.channels = 2;
  CorpusPlan plan = PlanCorpus(cfg);
  for (const auto *split : {&plan.train, &plan.test}) {
    for (const auto &m : *split) {
      MixResult r = RenderMixture(cfg, m);
      CHECK(std::abs(SnrDb(r.ref1.channel(0), r.ref2.channel(0)) - m.snr_db) < 1e-6);
      CHECK(r.mixture.num_channels() == 2);
    }
  }
}

TEST_CASE("built corpus is complete, readable and reproducible") {
  CorpusConfig cfg = SmallConfig();
  cfg.num_speakers = 4;
  cfg.num_train_mixtures = 5;
  cfg.num_test_mixtures = 3;
  cfg.channels = 2;
  fs::path d1 = ScratchDir("a"), d2 = ScratchDir("b");
  auto summary = BuildCorpus(cfg, d1.string());
  BuildCorpus(cfg, d2.string());
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].mixtures_ab + summary[0].mixtures_aa + summary[0].mixtures_bb == 5);

  for (const char *name : {"train.tsv", "test.tsv"}) {
    CHECK(Slurp(d1 / name) == Slurp(d2 / name));
    CHECK(Slurp(d1 / name).rfind(ManifestHeader() + "\n", 0) == 0);
    auto records = ReadManifest((d1 / name).string());
    for (const auto &r : records) {
      CHECK(r.adapt_path != r.src1_path);
      for (const auto &p : {r.mixture_path, r.src1_path, r.src2_path, r.adapt_path}) {
        REQUIRE(fs::exists(p));
        AudioSignal a = ReadWav(p);
        CHECK(a.num_samples() > 0);
        const fs::path rel = fs::relative(p, d1);
        CHECK(Slurp(p) == Slurp(d2 / rel));
      }
      CHECK(ReadWav(r.mixture_path).num_channels() == 2);
      // 16-bit storage: SNR re-measured from disk agrees to quantization.
      CHECK(std::abs(SnrDb(ReadWav(r.src1_path).channel(0),
                           ReadWav(r.src2_path).channel(0)) -
                     r.snr_db) < 0.01);
    }
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("manifest parse errors cite the line") {
  fs::path d = ScratchDir("m");
  fs::create_directories(d);
  const fs::path p = d / "bad.tsv";
  std::ofstream(p) << ManifestHeader() << "\n"
                   << "m1\ta.wav\tb.wav\tc.wav\td.wav\tspk0000\tspk0001\t1.5\tAB\t0\t0\n"
                   << "m2\ta.wav\tb.wav\n";
  try {
    ReadManifest(p.string());
    FAIL("expected a DataError");
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  std::ofstream(p) << ManifestHeader() << "\n"
                   << "m1\ta.wav\tb.wav\tc.wav\td.wav\tspk0000\tspk0001\tx\tAB\t0\t0\n";
  CHECK_THROWS_AS(ReadManifest(p.string()), DataError);
  std::ofstream(p) << ManifestHeader() << "\n"
                   << "m1\ta.wav\tb.wav\tc.wav\td.wav\tspk0000\tspk0001\t1\tCD\t0\t0\n";
  CHECK_THROWS_AS(ReadManifest(p.string()), DataError);
  std::ofstream(p) << ManifestHeader() << "\n";
  CHECK_THROWS_AS(ReadManifest(p.string()), DataError);
  CHECK_THROWS_AS(ReadManifest((d / "missing.tsv").string()), DataError);

  std::vector<MixtureRecord> recs(1);
  recs[0].mixture_id = "x";
  recs[0].mixture_path = "wav/x.wav";
  recs[0].snr_db = -3.25;
  WriteManifest(p.string(), recs);
  auto back = ReadManifest(p.string());
  CHECK(back[0].snr_db == -3.25);
  CHECK(back[0].mixture_path == (d / "wav/x.wav").string());
  fs::remove_all(d);
}
