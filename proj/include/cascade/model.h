// include/cascade/model.h

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

#ifndef CASCADE_MODEL_H_
#define CASCADE_MODEL_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cascade/tape.h"
#include "cascade/tensor.h"

namespace cascade {

// All architecture constants. Desk defaults are small; the production-scale
// values (layers 6/9, dim 2048, vocab 4096, ...) remain expressible.
struct ModelConfig {
  // Audio frontend.
  int64_t feature_dim = 16;  // D_mel
  int64_t stack = 4;
  int64_t stride = 3;
  double frame_step_ms = 10.0;
  double audio_mask_ratio = 0.15;
  // Text frontend.
  double text_mask_ratio = 0.25;
  int64_t text_upsample = 3;
  int64_t text_embed_dim = 32;
  // Encoders.
  int64_t causal_layers = 2;
  int64_t noncausal_layers = 3;
  int64_t model_dim = 64;
  int64_t heads = 4;
  int64_t conv_kernel = 7;
  int64_t right_context_frames = 30;
  int64_t ffn_dim = 128;
  int64_t max_rel_offset = 8;
  // Decoders (prediction + joint).
  int64_t vocab_size = 256;  // wordpieces including reserved symbols
  int64_t decoder_dim = 64;
  int64_t joint_dim = 64;
  int64_t max_symbols_per_frame = 4;
  // Masked-prediction quantizer.
  int64_t quantizer_codebook = 256;  // K
  int64_t quantizer_dim = 16;        // d_code
  bool bestrq_causal_head = false;

  int64_t StackedDim() const { return stack * feature_dim; }
  void Validate() const;
};

// Named parameter arrays. Iteration order is the map order, which keeps
// every whole-store walk (updates, serialization, gradient reduction)
// deterministic. Frozen arrays are never touched by the optimizer.
class ParamStore {
 public:
  void Add(const std::string& name, Tensor value, bool frozen = false);
  const Tensor& Get(const std::string& name) const;
  Tensor& GetMutable(const std::string& name);
  bool Has(const std::string& name) const { return params_.count(name) != 0; }
  bool IsFrozen(const std::string& name) const {
    return frozen_.count(name) != 0;
  }
  const std::map<std::string, Tensor>& entries() const { return params_; }
  std::map<std::string, Tensor>& entries() { return params_; }
  const std::set<std::string>& frozen() const { return frozen_; }

  int64_t TotalParameters() const;

 private:
  std::map<std::string, Tensor> params_;
  std::set<std::string> frozen_;
};

// Fresh model initialization; a pure function of (config, seed).
ParamStore InitModelParams(const ModelConfig& cfg, uint64_t seed);

// Leafs parameters into a tape on first use, so tasks that never touch a
// subnetwork never pay for it. Frozen arrays enter without gradients.
class ParamVars {
 public:
  ParamVars(Tape* tape, const ParamStore* store, bool trainable)
      : tape_(tape), store_(store), trainable_(trainable) {}

  Var operator[](const std::string& name);
  Tape& tape() { return *tape_; }

  // Routes `name` to an existing node instead of leafing from the store;
  // used by gradient checks to substitute one array.
  void Override(const std::string& name, Var v) { vars_.emplace(name, v); }

  // Gradients of every parameter leafed so far, in store order.
  std::map<std::string, Tensor> CollectGrads() const;

 private:
  Tape* tape_;
  const ParamStore* store_;
  bool trainable_;
  std::map<std::string, Var> vars_;
};

}  // namespace cascade

#endif  // CASCADE_MODEL_H_
