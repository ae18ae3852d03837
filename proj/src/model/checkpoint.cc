// src/model/checkpoint.cc

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

#include "tdsb/model/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "tdsb/model/model.h"
#include "tdsb/util/error.h"

namespace tdsb {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr uint32_t kMaxRank = 8;
constexpr uint32_t kMaxString = 1u << 20;

class Writer {
 public:
  template <typename T>
  void Put(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf_.append(b, sizeof(T));
  }
  void PutString(const std::string &s) {
    Put<uint32_t>(static_cast<uint32_t>(s.size()));
    buf_.append(s);
  }
  void PutDoubles(const std::vector<double> &v) {
    buf_.append(reinterpret_cast<const char *>(v.data()), v.size() * sizeof(double));
  }
  const std::string &bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : buf_(std::move(bytes)), path_(std::move(path)) {}

  template <typename T>
  T Get(const char *what) {
    Need(sizeof(T), what);
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string GetString(const char *what) {
    const uint32_t n = Get<uint32_t>(what);
    if (n > kMaxString) Fail(std::string("implausible length for ") + what);
    Need(n, what);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> GetDoubles(size_t count, const char *what) {
    if (count > (buf_.size() - pos_) / sizeof(double))
      Fail(std::string("truncated ") + what);
    std::vector<double> v(count);
    std::memcpy(v.data(), buf_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
    return v;
  }
  bool AtEnd() const { return pos_ == buf_.size(); }
  [[noreturn]] void Fail(const std::string &msg) const {
    throw DataError("corrupt checkpoint " + path_ + ": " + msg);
  }

 private:
  void Need(size_t n, const char *what) const {
    if (buf_.size() - pos_ < n) Fail(std::string("truncated while reading ") + what);
  }
  std::string buf_;
  std::string path_;
  size_t pos_ = 0;
};

void PutTopology(Writer &w, const TopologyConfig &t) {
  for (int32_t v : {static_cast<int32_t>(t.kind), static_cast<int32_t>(t.ipd_mode),
                    t.N, t.L, t.B, t.H, t.P, t.X, t.R, t.num_outputs,
                    t.embedding_dim, t.num_speakers, t.stft_frame, t.stft_hop})
    w.Put<int32_t>(v);
}

TopologyConfig GetTopology(Reader &r) {
  TopologyConfig t;
  const int32_t kind = r.Get<int32_t>("model kind");
  const int32_t ipd = r.Get<int32_t>("IPD mode");
  if (kind < 0 || kind > 2) r.Fail("unknown model kind " + std::to_string(kind));
  if (ipd < 0 || ipd > 2) r.Fail("unknown IPD mode " + std::to_string(ipd));
  t.kind = static_cast<ModelKind>(kind);
  t.ipd_mode = static_cast<IpdMode>(ipd);
  for (int *f : {&t.N, &t.L, &t.B, &t.H, &t.P, &t.X, &t.R, &t.num_outputs,
                 &t.embedding_dim, &t.num_speakers, &t.stft_frame, &t.stft_hop})
    *f = r.Get<int32_t>("topology");
  return t;
}

}  // namespace

const CheckpointRecord *Checkpoint::Find(const std::string &name) const {
  for (const auto &rec : records)
    if (rec.name == name) return &rec;
  return nullptr;
}

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt) {
  Writer w;
  for (int i = 0; i < 8; ++i) w.Put<char>(kCheckpointMagic[i]);
  w.Put<uint32_t>(kCheckpointVersion);
  PutTopology(w, ckpt.topology);
  const CheckpointMeta &m = ckpt.meta;
  w.Put<double>(m.alpha);
  w.Put<int32_t>(m.epoch);
  w.Put<int64_t>(m.step);
  w.Put<double>(m.learning_rate);
  w.Put<double>(m.best_score);
  w.Put<int32_t>(m.epochs_since_best);
  w.PutString(m.rng_state);
  w.Put<uint32_t>(static_cast<uint32_t>(m.speakers.size()));
  for (const auto &s : m.speakers) w.PutString(s);
  w.Put<uint32_t>(static_cast<uint32_t>(ckpt.records.size()));
  for (const auto &rec : ckpt.records) {
    if (static_cast<int64_t>(rec.data.size()) != NumElements(rec.shape))
      throw ShapeError("checkpoint record '" + rec.name + "' has " +
                       std::to_string(rec.data.size()) + " values for shape " +
                       ShapeString(rec.shape));
    w.PutString(rec.name);
    w.Put<uint32_t>(static_cast<uint32_t>(rec.shape.size()));
    for (int d : rec.shape) w.Put<uint32_t>(static_cast<uint32_t>(d));
    w.PutDoubles(rec.data);
  }

  // Write to a sibling file first so an interrupted save never leaves a
  // half-written checkpoint under the final name.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp + " for writing");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw DataError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("cannot move " + tmp + " to " + path);
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path);
  char magic[8];
  for (char &c : magic) c = r.Get<char>("magic");
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0)
    r.Fail("bad magic (not a tdsb checkpoint)");
  const uint32_t version = r.Get<uint32_t>("version");
  if (version != kCheckpointVersion)
    r.Fail("unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.topology = GetTopology(r);
  CheckpointMeta &m = ckpt.meta;
  m.alpha = r.Get<double>("alpha");
  m.epoch = r.Get<int32_t>("epoch");
  m.step = r.Get<int64_t>("step");
  m.learning_rate = r.Get<double>("learning rate");
  m.best_score = r.Get<double>("best score");
  m.epochs_since_best = r.Get<int32_t>("plateau counter");
  m.rng_state = r.GetString("rng state");
  const uint32_t num_speakers = r.Get<uint32_t>("speaker count");
  for (uint32_t i = 0; i < num_speakers; ++i)
    m.speakers.push_back(r.GetString("speaker id"));
  const uint32_t count = r.Get<uint32_t>("record count");
  for (uint32_t i = 0; i < count; ++i) {
    CheckpointRecord rec;
    rec.name = r.GetString("record name");
    const uint32_t rank = r.Get<uint32_t>("record rank");
    if (rank == 0 || rank > kMaxRank)
      r.Fail("record '" + rec.name + "' has rank " + std::to_string(rank));
    size_t total = 1;
    for (uint32_t k = 0; k < rank; ++k) {
      const uint32_t d = r.Get<uint32_t>("record dims");
      if (d == 0 || d > (1u << 30))
        r.Fail("record '" + rec.name + "' has extent " + std::to_string(d));
      rec.shape.push_back(static_cast<int>(d));
      total *= d;
    }
    rec.data = r.GetDoubles(total, "record data");
    ckpt.records.push_back(std::move(rec));
  }
  if (!r.AtEnd()) r.Fail("trailing bytes after the last record");
  return ckpt;
}

void AppendParams(Checkpoint &ckpt, const ParamSet &params,
                  const std::string &prefix) {
  for (const auto &[name, t] : params.items())
    ckpt.records.push_back(
        {prefix + name, t.shape(), std::vector<double>(t.data().begin(), t.data().end())});
}

void RestoreParams(const Checkpoint &ckpt, ParamSet &params,
                   const std::string &prefix) {
  for (auto &[name, t] : params.items()) {
    const CheckpointRecord *rec = ckpt.Find(prefix + name);
    if (!rec) throw DataError("checkpoint lacks '" + prefix + name + "'");
    if (rec->shape != t.shape())
      throw DataError("checkpoint record '" + prefix + name + "' has shape " +
                      ShapeString(rec->shape) + ", model expects " +
                      ShapeString(t.shape()));
    std::copy(rec->data.begin(), rec->data.end(), t.mutable_data().begin());
  }
}

Checkpoint MakeCheckpoint(const Model &model, const CheckpointMeta &meta) {
  Checkpoint ckpt;
  ckpt.topology = model.topology();
  ckpt.meta = meta;
  AppendParams(ckpt, model.params());
  return ckpt;
}

std::unique_ptr<Model> LoadModel(const Checkpoint &ckpt) {
  TopologyConfig topo = ckpt.topology;
  try {
    topo.Validate();
  } catch (const UsageError &e) {
    throw DataError(std::string("checkpoint topology invalid: ") + e.what());
  }
  auto model = std::make_unique<Model>(topo, 0);
  RestoreParams(ckpt, model->params());
  return model;
}

}  // namespace tdsb
