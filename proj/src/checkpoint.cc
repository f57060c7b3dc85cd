// src/checkpoint.cc

// Copyright 2026  Cascade ASR Project Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cascade/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

namespace cascade {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

uint64_t Fnv1a(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  void Raw(const void* p, size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  void U8(uint8_t v) { Raw(&v, 1); }
  void U32(uint32_t v) { Raw(&v, 4); }
  void U64(uint64_t v) { Raw(&v, 8); }
  void F64(double v) { Raw(&v, 8); }
  void Str(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    Raw(s.data(), s.size());
  }
  void TensorPayload(const Tensor& t) {
    U32(static_cast<uint32_t>(t.Rank()));
    for (int64_t e : t.shape()) U64(static_cast<uint64_t>(e));
    Raw(t.data().data(), t.data().size() * sizeof(double));
  }
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  void Raw(void* p, size_t n) {
    CASCADE_CHECK_RUNTIME(pos_ + n <= data_.size(),
                          "checkpoint truncated or corrupt");
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  uint8_t U8() {
    uint8_t v;
    Raw(&v, 1);
    return v;
  }
  uint32_t U32() {
    uint32_t v;
    Raw(&v, 4);
    return v;
  }
  uint64_t U64() {
    uint64_t v;
    Raw(&v, 8);
    return v;
  }
  double F64() {
    double v;
    Raw(&v, 8);
    return v;
  }
  std::string Str() {
    uint32_t n = U32();
    CASCADE_CHECK_RUNTIME(pos_ + n <= data_.size(),
                          "checkpoint truncated or corrupt");
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Tensor TensorPayload() {
    uint32_t rank = U32();
    CASCADE_CHECK_RUNTIME(rank <= 8, "checkpoint tensor rank out of range");
    std::vector<int64_t> shape;
    int64_t elems = 1;
    for (uint32_t i = 0; i < rank; ++i) {
      shape.push_back(static_cast<int64_t>(U64()));
      elems *= shape.back();
    }
    CASCADE_CHECK_RUNTIME(elems >= 0 &&
                              pos_ + static_cast<size_t>(elems) * 8 <=
                                  data_.size(),
                          "checkpoint truncated or corrupt");
    std::vector<double> data(static_cast<size_t>(elems));
    Raw(data.data(), data.size() * sizeof(double));
    return Tensor(std::move(shape), std::move(data));
  }
  bool AtEnd() const { return pos_ == data_.size(); }
  size_t pos() const { return pos_; }

 private:
  std::string data_;
  size_t pos_ = 0;
};

}  // namespace

std::string CanonicalModelConfigText(const ModelConfig& c) {
  std::ostringstream os;
  os << "feature_dim=" << c.feature_dim << "\n"
     << "stack=" << c.stack << "\n"
     << "stride=" << c.stride << "\n"
     << "frame_step_ms=" << c.frame_step_ms << "\n"
     << "audio_mask_ratio=" << c.audio_mask_ratio << "\n"
     << "text_mask_ratio=" << c.text_mask_ratio << "\n"
     << "text_upsample=" << c.text_upsample << "\n"
     << "text_embed_dim=" << c.text_embed_dim << "\n"
     << "causal_layers=" << c.causal_layers << "\n"
     << "noncausal_layers=" << c.noncausal_layers << "\n"
     << "model_dim=" << c.model_dim << "\n"
     << "heads=" << c.heads << "\n"
     << "conv_kernel=" << c.conv_kernel << "\n"
     << "right_context_frames=" << c.right_context_frames << "\n"
     << "ffn_dim=" << c.ffn_dim << "\n"
     << "max_rel_offset=" << c.max_rel_offset << "\n"
     << "vocab_size=" << c.vocab_size << "\n"
     << "decoder_dim=" << c.decoder_dim << "\n"
     << "joint_dim=" << c.joint_dim << "\n"
     << "max_symbols_per_frame=" << c.max_symbols_per_frame << "\n"
     << "quantizer_codebook=" << c.quantizer_codebook << "\n"
     << "quantizer_dim=" << c.quantizer_dim << "\n"
     << "bestrq_causal_head=" << (c.bestrq_causal_head ? 1 : 0) << "\n";
  return os.str();
}

uint64_t ConfigDigest(const ModelConfig& cfg) {
  return Fnv1a(CanonicalModelConfigText(cfg));
}

void CheckConfigCompatible(const ModelConfig& expected,
                           const ModelConfig& loaded) {
  const std::string a = CanonicalModelConfigText(expected);
  const std::string b = CanonicalModelConfigText(loaded);
  if (a == b) return;
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  while (std::getline(sa, la) && std::getline(sb, lb)) {
    if (la != lb) {
      const std::string key = la.substr(0, la.find('='));
      throw RuntimeFailure(StrCat("checkpoint config digest mismatch at '",
                                  key, "': checkpoint has ",
                                  lb.substr(lb.find('=') + 1), ", expected ",
                                  la.substr(la.find('=') + 1)));
    }
  }
  throw RuntimeFailure("checkpoint config digest mismatch");
}

namespace {

ModelConfig ParseCanonicalConfig(const std::string& text) {
  ModelConfig c;
  std::istringstream is(text);
  std::string line;
  auto want = [&](const char* key) -> std::string {
    CASCADE_CHECK_RUNTIME(std::getline(is, line) &&
                              line.rfind(std::string(key) + "=", 0) == 0,
                          "checkpoint config text malformed near ", key);
    return line.substr(std::strlen(key) + 1);
  };
  c.feature_dim = std::stoll(want("feature_dim"));
  c.stack = std::stoll(want("stack"));
  c.stride = std::stoll(want("stride"));
  c.frame_step_ms = std::stod(want("frame_step_ms"));
  c.audio_mask_ratio = std::stod(want("audio_mask_ratio"));
  c.text_mask_ratio = std::stod(want("text_mask_ratio"));
  c.text_upsample = std::stoll(want("text_upsample"));
  c.text_embed_dim = std::stoll(want("text_embed_dim"));
  c.causal_layers = std::stoll(want("causal_layers"));
  c.noncausal_layers = std::stoll(want("noncausal_layers"));
  c.model_dim = std::stoll(want("model_dim"));
  c.heads = std::stoll(want("heads"));
  c.conv_kernel = std::stoll(want("conv_kernel"));
  c.right_context_frames = std::stoll(want("right_context_frames"));
  c.ffn_dim = std::stoll(want("ffn_dim"));
  c.max_rel_offset = std::stoll(want("max_rel_offset"));
  c.vocab_size = std::stoll(want("vocab_size"));
  c.decoder_dim = std::stoll(want("decoder_dim"));
  c.joint_dim = std::stoll(want("joint_dim"));
  c.max_symbols_per_frame = std::stoll(want("max_symbols_per_frame"));
  c.quantizer_codebook = std::stoll(want("quantizer_codebook"));
  c.quantizer_dim = std::stoll(want("quantizer_dim"));
  c.bestrq_causal_head = std::stoll(want("bestrq_causal_head")) != 0;
  return c;
}

void WriteNamedTensors(Writer& w, const std::map<std::string, Tensor>& m,
                       const ParamStore* frozen_source) {
  w.U32(static_cast<uint32_t>(m.size()));
  for (const auto& [name, tensor] : m) {
    w.Str(name);
    w.U8(frozen_source && frozen_source->IsFrozen(name) ? 1 : 0);
    w.U8(0);  // dtype: float64
    w.TensorPayload(tensor);
  }
}

void ReadNamedTensors(Reader& r, std::map<std::string, Tensor>* out,
                      std::set<std::string>* frozen_names) {
  const uint32_t n = r.U32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.Str();
    const uint8_t frozen = r.U8();
    const uint8_t dtype = r.U8();
    CASCADE_CHECK_RUNTIME(dtype == 0, "unsupported dtype tag in checkpoint");
    Tensor t = r.TensorPayload();
    if (frozen && frozen_names) frozen_names->insert(name);
    out->emplace(std::move(name), std::move(t));
  }
}

}  // namespace

void SaveCheckpoint(const TrainState& state, const std::string& path) {
  Writer w;
  w.Raw(kMagic, 8);
  w.U32(kVersion);
  w.U64(static_cast<uint64_t>(state.step));
  w.U64(state.master_seed);
  w.U64(state.rng_state.state);
  w.U64(state.rng_state.has_spare);
  w.F64(state.rng_state.spare);
  const std::string cfg_text = CanonicalModelConfigText(state.model_cfg);
  w.Str(cfg_text);
  w.U64(Fnv1a(cfg_text));
  WriteNamedTensors(w, state.params.entries(), &state.params);
  w.U8(1);  // optimizer section present
  w.U64(static_cast<uint64_t>(state.opt.t));
  WriteNamedTensors(w, state.opt.m, nullptr);
  WriteNamedTensors(w, state.opt.v, nullptr);

  const uint64_t digest = Fnv1a(w.buffer());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open for write: ", path);
  f.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  f.write(reinterpret_cast<const char*>(&digest), 8);
  CASCADE_CHECK_RUNTIME(f.good(), "checkpoint write failed: ", path);
}

TrainState LoadCheckpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open checkpoint: ", path);
  std::ostringstream ss;
  ss << f.rdbuf();
  std::string blob = ss.str();
  CASCADE_CHECK_RUNTIME(blob.size() >= 8 + 8,
                        "checkpoint truncated or corrupt");
  uint64_t stored_hash;
  std::memcpy(&stored_hash, blob.data() + blob.size() - 8, 8);
  std::string payload = blob.substr(0, blob.size() - 8);
  CASCADE_CHECK_RUNTIME(Fnv1a(payload) == stored_hash,
                        "checkpoint content hash mismatch (corrupt file): ",
                        path);

  Reader r(std::move(payload));
  char magic[8];
  r.Raw(magic, 8);
  CASCADE_CHECK_RUNTIME(std::memcmp(magic, kMagic, 8) == 0,
                        "not a checkpoint file: ", path);
  CASCADE_CHECK_RUNTIME(r.U32() == kVersion,
                        "unsupported checkpoint version in ", path);
  TrainState state;
  state.step = static_cast<int64_t>(r.U64());
  state.master_seed = r.U64();
  state.rng_state.state = r.U64();
  state.rng_state.has_spare = r.U64();
  state.rng_state.spare = r.F64();
  const std::string cfg_text = r.Str();
  const uint64_t cfg_digest = r.U64();
  CASCADE_CHECK_RUNTIME(Fnv1a(cfg_text) == cfg_digest,
                        "checkpoint config digest mismatch (corrupt file)");
  state.model_cfg = ParseCanonicalConfig(cfg_text);

  std::map<std::string, Tensor> params;
  std::set<std::string> frozen;
  ReadNamedTensors(r, &params, &frozen);
  for (auto& [name, tensor] : params)
    state.params.Add(name, std::move(tensor), frozen.count(name) != 0);
  const uint8_t has_opt = r.U8();
  if (has_opt) {
    state.opt.t = static_cast<int64_t>(r.U64());
    ReadNamedTensors(r, &state.opt.m, nullptr);
    ReadNamedTensors(r, &state.opt.v, nullptr);
  }
  CASCADE_CHECK_RUNTIME(r.AtEnd(), "checkpoint has trailing bytes: ", path);
  return state;
}

}  // namespace cascade
