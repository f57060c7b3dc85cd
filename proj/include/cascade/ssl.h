// include/cascade/ssl.h

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

#ifndef CASCADE_SSL_H_
#define CASCADE_SSL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/frontend.h"
#include "cascade/tensor.h"

namespace cascade {

// Frozen random-projection quantizer: both arrays are fixed at
// initialization and never updated by training. Codebook rows are
// L2-normalized.
struct Quantizer {
  Tensor projection;  // [D_stack x d_code]
  Tensor codebook;    // [K x d_code]
  uint64_t seed = 0;
  // Probe counter for the skip contract: incremented by Quantize.
  mutable int64_t quantize_calls = 0;
};

// Projection entries ~ N(0, 1/d_code); codebook rows N(0,1) then
// L2-normalized.
Quantizer InitQuantizer(uint64_t seed, int64_t d_stack, int64_t d_code,
                        int64_t k);

// Per frame: L2-normalize(projection^T * frame), then nearest codebook row
// by squared distance, ties to the lowest index. Zero frames stay zero.
std::vector<int32_t> Quantize(const Quantizer& q, const StackedFeatures& sf);

// Mean cross-entropy of head logits vs targets over masked frames only.
// Returns nullopt when no frame is masked (the example is skipped).
// logits come from h frames through the head parameters, so frames outside
// the span receive exactly zero gradient.
std::optional<Var> BestRqLoss(Var h, std::span<const int32_t> targets,
                              const MaskInfo& info, Var head_w, Var head_b);

}  // namespace cascade

#endif  // CASCADE_SSL_H_
