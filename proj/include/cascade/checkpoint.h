// include/cascade/checkpoint.h

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

#ifndef CASCADE_CHECKPOINT_H_
#define CASCADE_CHECKPOINT_H_

#include <map>
#include <string>

#include "cascade/model.h"
#include "cascade/rng.h"

namespace cascade {

struct AdamState {
  std::map<std::string, Tensor> m, v;
  int64_t t = 0;
};

// Everything needed to resume training bit-exactly.
struct TrainState {
  ModelConfig model_cfg;
  ParamStore params;
  AdamState opt;
  int64_t step = 0;
  uint64_t master_seed = 0;
  Rng::State rng_state;
};

// Fixed-order `key=value` text of the architecture fields; the digest basis.
std::string CanonicalModelConfigText(const ModelConfig& cfg);
uint64_t ConfigDigest(const ModelConfig& cfg);

// Container layout: magic, version, step, seed, rng, canonical config text
// + digest, length-prefixed named arrays (name, frozen flag, dtype tag,
// shape, little-endian float64 payload), optimizer moments, then a trailing
// 64-bit content hash. Round trips are bit-exact.
void SaveCheckpoint(const TrainState& state, const std::string& path);
TrainState LoadCheckpoint(const std::string& path);

// Throws naming the first differing field when the checkpoint was written
// under a different architecture.
void CheckConfigCompatible(const ModelConfig& expected,
                           const ModelConfig& loaded);

}  // namespace cascade

#endif  // CASCADE_CHECKPOINT_H_
