// python/bindings.cc

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

// Python bindings for the tdspkbeam core library.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tdsb/corpus/corpus.h"
#include "tdsb/dsp/features.h"
#include "tdsb/dsp/stft.h"
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

namespace py = pybind11;
using namespace tdsb;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> ToVector(const Array &a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-D array, got " + std::to_string(a.ndim()) + "-D");
  return {a.data(), a.data() + a.size()};
}

// Accepts [n] (mono) or [channels, n].
AudioSignal ToSignal(const Array &a, int sample_rate) {
  AudioSignal sig;
  sig.sample_rate = sample_rate;
  if (a.ndim() == 1) {
    sig.channels.emplace_back(a.data(), a.data() + a.size());
  } else if (a.ndim() == 2) {
    const py::ssize_t n = a.shape(1);
    for (py::ssize_t c = 0; c < a.shape(0); ++c)
      sig.channels.emplace_back(a.data(c, 0), a.data(c, 0) + n);
  } else {
    throw ShapeError("expected a [n] or [channels, n] array");
  }
  sig.Validate();
  return sig;
}

py::array_t<double> FromVector(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> FromSignal(const AudioSignal &sig) {
  py::array_t<double> out({static_cast<py::ssize_t>(sig.num_channels()),
                           static_cast<py::ssize_t>(sig.num_samples())});
  for (int c = 0; c < sig.num_channels(); ++c)
    std::copy(sig.channels[c].begin(), sig.channels[c].end(), out.mutable_data(c, 0));
  return out;
}

py::array_t<double> FromFeatures(const FeatureMatrix &f) {
  py::array_t<double> out({f.rows, f.cols});
  std::copy(f.data.begin(), f.data.end(), out.mutable_data());
  return out;
}

py::dict RecordToDict(const RecordResult &r) {
  py::dict d;
  d["mixture_id"] = r.mixture_id;
  d["pair_type"] = PairTypeName(r.pair_type);
  d["mixture_sisnr"] = r.mixture_sisnr;
  d["output_sisnr"] = r.output_sisnr;
  d["improvement"] = r.improvement;
  d["chosen"] = r.chosen;
  d["oracle"] = r.oracle;
  return d;
}

class PyModel {
 public:
  explicit PyModel(std::unique_ptr<Model> m) : model_(std::move(m)) {}

  static PyModel Load(const std::string &path) { return PyModel(LoadModel(LoadCheckpoint(path))); }

  std::string kind() const { return std::string(ModelKindName(model_->topology().kind)); }
  std::string ipd_mode() const { return std::string(IpdModeName(model_->topology().ipd_mode)); }

  py::array_t<double> Extract(const Array &mixture, const Array &adaptation, int sample_rate) const {
    const AudioSignal mix = ToSignal(mixture, sample_rate);
    const std::vector<double> adapt = ToVector(adaptation);
    NoGradGuard no_grad;
    const ModelInput in = PrepareInput(mix, model_->topology());
    return FromVector(model_->Extract(in.waveform, WaveformTensor(adapt), in.ipd).estimate.data());
  }

  py::tuple Separate(const Array &mixture, int sample_rate) const {
    const AudioSignal mix = ToSignal(mixture, sample_rate);
    NoGradGuard no_grad;
    const ModelInput in = PrepareInput(mix, model_->topology());
    const SeparateOutput out = model_->Separate(in.waveform, in.ipd);
    return py::make_tuple(FromVector(out.estimate1.data()), FromVector(out.estimate2.data()));
  }

  py::array_t<double> Embed(const Array &adaptation) const {
    return FromVector(EmbedWaveform(*model_, ToVector(adaptation)));
  }

 private:
  std::unique_ptr<Model> model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-domain target speaker extraction (TD-SpeakerBeam) core";

  auto base = py::register_exception<Error>(m, "TdsbError");
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def(
      "sisnr_db",
      [](const Array &ref, const Array &est) { return SiSnrDb(ToVector(ref), ToVector(est)); },
      py::arg("reference"), py::arg("estimate"), "Scale-invariant SNR in dB.");

  m.def(
      "stft",
      [](const Array &signal, int frame_len, int hop) {
        const Spectrogram s = Stft(ToSignal(signal, kDefaultSampleRate), frame_len, hop);
        py::array_t<std::complex<double>> out({s.num_channels, s.num_frames, s.num_bins});
        std::copy(s.coef.begin(), s.coef.end(), out.mutable_data());
        return out;
      },
      py::arg("signal"), py::arg("frame_len") = 256, py::arg("hop") = 128,
      "Hann-windowed STFT of a [n] or [channels, n] signal -> [channels, frames, bins].");

  m.def(
      "ipd_features",
      [](const Array &signal, int frame_len, int hop) {
        return FromFeatures(IpdFeatures(Stft(ToSignal(signal, kDefaultSampleRate), frame_len, hop)));
      },
      py::arg("signal"), py::arg("frame_len") = 256, py::arg("hop") = 128,
      "cos/sin inter-channel phase features of a [2, n] signal -> [frames, 2 * bins].");

  m.def(
      "read_wav", [](const std::string &path) {
        const AudioSignal s = ReadWav(path);
        return py::make_tuple(FromSignal(s), s.sample_rate);
      },
      py::arg("path"), "Returns ([channels, n] float array, sample_rate).");
  m.def(
      "write_wav",
      [](const std::string &path, const Array &signal, int sample_rate) {
        WriteWav(path, ToSignal(signal, sample_rate));
      },
      py::arg("path"), py::arg("signal"), py::arg("sample_rate") = kDefaultSampleRate);

  m.def(
      "build_corpus",
      [](const std::string &out, int speakers, int mixtures, int test_mixtures,
         int test_speakers, uint64_t seed, int channels) {
        CorpusConfig cfg;
        cfg.num_speakers = speakers;
        cfg.num_train_mixtures = mixtures;
        cfg.num_test_mixtures = test_mixtures;
        cfg.num_test_speakers = test_speakers;
        cfg.seed = seed;
        cfg.channels = channels;
        py::list rows;
        for (const CorpusSummaryRow &r : BuildCorpus(cfg, out)) {
          py::dict d;
          d["split"] = r.split;
          d["speakers_a"] = r.speakers_a;
          d["speakers_b"] = r.speakers_b;
          d["AA"] = r.mixtures_aa;
          d["BB"] = r.mixtures_bb;
          d["AB"] = r.mixtures_ab;
          rows.append(d);
        }
        return rows;
      },
      py::arg("out"), py::arg("speakers") = 16, py::arg("mixtures") = 256,
      py::arg("test_mixtures") = 64, py::arg("test_speakers") = 0, py::arg("seed") = 0,
      py::arg("channels") = 1,
      "Generate a synthetic two-speaker corpus; test_speakers=0 picks a quarter.");

  m.def(
      "train",
      [](const std::string &manifest, const std::string &out, const std::string &config,
         std::optional<std::string> mode, std::optional<std::string> ipd,
         std::optional<double> alpha, std::optional<uint64_t> seed,
         std::optional<int> max_epochs, bool resume) {
        TrainConfig cfg = config.empty() ? TrainConfig() : LoadTrainConfig(config);
        if (mode) cfg.topology.kind = ParseModelKind(*mode);
        if (ipd) cfg.topology.ipd_mode = ParseIpdMode(*ipd);
        if (alpha) cfg.alpha = *alpha;
        if (seed) cfg.seed = *seed;
        if (max_epochs) cfg.max_epochs = *max_epochs;
        cfg.topology.Normalize();
        TrainOptions opt;
        opt.out_path = out;
        opt.resume = resume;
        const auto records = ReadManifest(manifest);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = Train(records, cfg, opt);
        }
        py::list history;
        for (const EpochMetrics &e : r.history)
          history.append(py::make_tuple(e.epoch, e.loss, e.sisnr_db, e.cross_entropy));
        py::dict d;
        d["history"] = history;
        d["best_score"] = r.best_score;
        d["best_epoch"] = r.best_epoch;
        d["speakers"] = r.speakers;
        return d;
      },
      py::arg("manifest"), py::arg("out"), py::arg("config") = "", py::arg("mode") = py::none(),
      py::arg("ipd") = py::none(), py::arg("alpha") = py::none(), py::arg("seed") = py::none(),
      py::arg("max_epochs") = py::none(), py::arg("resume") = false,
      "Train on a manifest and write the checkpoint to `out`.");

  m.def(
      "evaluate",
      [](const std::string &ckpt, const std::string &manifest, const std::string &select,
         const std::string &aux) {
        std::vector<RecordResult> results;
        const SelectionMethod method = ParseSelectionMethod(select);
        {
          py::gil_scoped_release release;
          results = EvaluateCheckpoint(ckpt, manifest, method, aux);
        }
        py::list records;
        for (const RecordResult &r : results) records.append(RecordToDict(r));
        py::dict summary;
        for (const PairTypeRow &row : SummarizeByPairType(results))
          summary[py::str(row.label)] = py::make_tuple(row.count, row.mean_improvement);
        py::dict d;
        d["records"] = records;
        d["summary"] = summary;
        return d;
      },
      py::arg("checkpoint"), py::arg("manifest"), py::arg("select") = "oracle",
      py::arg("aux") = "",
      "Score a checkpoint on a manifest; summary maps AA/BB/AB/avg to (count, mean SiSNRi).");

  m.def(
      "gradcheck",
      [](uint64_t seed) {
        py::list out;
        for (const GradCheckRecord &r : RunFullGradientSuite(seed))
          out.append(py::make_tuple(r.name, r.max_rel_error, r.passed));
        return out;
      },
      py::arg("seed") = 0, "Finite-difference gradient checks: [(name, max_rel_error, passed)].");

  py::class_<PyModel>(m, "Model")
      .def_static("load", &PyModel::Load, py::arg("path"))
      .def_property_readonly("kind", &PyModel::kind)
      .def_property_readonly("ipd_mode", &PyModel::ipd_mode)
      .def("extract", &PyModel::Extract, py::arg("mixture"), py::arg("adaptation"),
           py::arg("sample_rate") = kDefaultSampleRate)
      .def("separate", &PyModel::Separate, py::arg("mixture"),
           py::arg("sample_rate") = kDefaultSampleRate)
      .def("embed", &PyModel::Embed, py::arg("adaptation"));
}
