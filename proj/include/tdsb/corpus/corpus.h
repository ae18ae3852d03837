// tdsb/corpus/corpus.h

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

#ifndef TDSB_CORPUS_CORPUS_H_
#define TDSB_CORPUS_CORPUS_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tdsb/dsp/audio.h"
#include "tdsb/dsp/mix.h"

namespace tdsb {

/// Two voice families with disjoint fundamental-frequency ranges, standing
/// in for the female/male split of real corpora.
enum class SpeakerFamily { kA, kB };

inline constexpr double kUtteranceRms = 0.05;
inline constexpr std::array<double, 2> kFamilyAF0 = {90.0, 140.0};
inline constexpr std::array<double, 2> kFamilyBF0 = {170.0, 250.0};
/// Test speakers are numbered from here so they never collide with (and
/// stay fixed across) training-speaker counts.
inline constexpr int kTestSpeakerBase = 1000;

struct SyntheticSpeaker {
  int index = 0;
  std::string speaker_id;  // "spk0007"
  SpeakerFamily family = SpeakerFamily::kA;
  double f0_hz = 100.0;
  std::array<double, 3> formant_hz{};
  std::array<double, 3> bandwidth_hz{};
  double vibrato_rate_hz = 5.0;
  double vibrato_depth = 0.01;  // relative f0 excursion
  double spectral_tilt = 1.5;   // harmonic k scaled by k^-tilt
};

/// Speaker profile; a pure function of `index` (family by parity).
SyntheticSpeaker MakeSpeaker(int index);
std::string SpeakerId(int index);

/// Voiced babble for one speaker: 3-8 harmonic segments, each with its own
/// pitch glide and formant perturbation, separated by short silences, RMS
/// normalized to kUtteranceRms. Deterministic in (speaker, seed).
/// UsageError unless duration_s is in [0.5, 4].
AudioSignal SynthUtterance(const SyntheticSpeaker &spk, uint64_t seed,
                           double duration_s,
                           int sample_rate = kDefaultSampleRate);

enum class PairType { kAA, kBB, kAB };
std::string PairTypeName(PairType t);
PairType ParsePairType(const std::string &s);
PairType PairTypeOf(SpeakerFamily target, SpeakerFamily interferer);

/// One line of a manifest. Paths are as written in the file (relative to
/// the manifest's directory) until resolved by ReadManifest.
struct MixtureRecord {
  std::string mixture_id;
  std::string mixture_path;
  std::string src1_path;  // target as it appears in the mixture
  std::string src2_path;  // interferer as it appears in the mixture
  std::string adapt_path;
  std::string target_spk;
  std::string interferer_spk;
  double snr_db = 0.0;
  PairType pair_type = PairType::kAB;
  int delay1 = 0;
  int delay2 = 0;
};

/// Header line of every manifest.
std::string ManifestHeader();
void WriteManifest(const std::string &path,
                   const std::vector<MixtureRecord> &records);
/// Parses a manifest; relative paths are resolved against the manifest's
/// directory. DataError (with line number) on malformed lines.
std::vector<MixtureRecord> ReadManifest(const std::string &path);

struct CorpusConfig {
  int num_speakers = 16;          // training + test speakers
  int num_test_speakers = 0;      // 0: max(2, num_speakers / 4), even
  int num_train_mixtures = 256;
  int num_test_mixtures = 64;
  int utterances_per_speaker = 8;
  int channels = 1;
  int max_delay = 4;              // per-source inter-channel delay range
  double min_utterance_s = 1.0;
  double max_utterance_s = 2.0;
  double min_snr_db = -5.0;
  double max_snr_db = 5.0;
  uint64_t seed = 0;
  int sample_rate = kDefaultSampleRate;

  int ResolvedTestSpeakers() const;
  /// UsageError naming the violated constraint.
  void Validate() const;
};

/// What to mix, before rendering any audio.
struct MixtureSpec {
  std::string mixture_id;
  bool is_test = false;
  int target = 0;       // speaker index
  int interferer = 0;
  int target_utt = 0;
  int interferer_utt = 0;
  int adapt_utt = 0;    // always != target_utt
  double snr_db = 0.0;
  PairType pair_type = PairType::kAB;
  int delay1 = 0;
  int delay2 = 0;
};

struct CorpusPlan {
  std::vector<int> train_speakers;
  std::vector<int> test_speakers;
  std::vector<MixtureSpec> train;
  std::vector<MixtureSpec> test;
};

/// Speaker split and mixture specs; a pure function of the config. The
/// test half depends only on (seed, test speaker count, test mixture count)
/// so it is shared by corpora that differ only in training speakers.
CorpusPlan PlanCorpus(const CorpusConfig &cfg);

/// Utterance `utt` of speaker `index` (duration drawn from the config).
AudioSignal RenderUtterance(const CorpusConfig &cfg, int index, int utt);
/// Renders one mixture in memory (full precision).
MixResult RenderMixture(const CorpusConfig &cfg, const MixtureSpec &spec);

struct CorpusSummaryRow {
  std::string split;  // "train" / "test"
  int speakers_a = 0;
  int speakers_b = 0;
  int mixtures_aa = 0;
  int mixtures_bb = 0;
  int mixtures_ab = 0;
};

/// Renders every mixture and writes <dir>/train.tsv, <dir>/test.tsv and
/// the 16-bit WAV tree under <dir>/wav. Returns per-split counts.
std::vector<CorpusSummaryRow> BuildCorpus(const CorpusConfig &cfg,
                                          const std::string &dir);

}  // namespace tdsb

#endif  // TDSB_CORPUS_CORPUS_H_
