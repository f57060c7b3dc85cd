// include/cascade/frontend.h

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

#ifndef CASCADE_FRONTEND_H_
#define CASCADE_FRONTEND_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "cascade/rng.h"
#include "cascade/tape.h"
#include "cascade/tensor.h"

namespace cascade {

// Per-frame acoustic features, time-major [T x D_mel].
struct FeatureSequence {
  Tensor frames;  // [T x D_mel]
  double frame_step_ms = 10.0;

  int64_t NumFrames() const { return frames.Rank() == 2 ? frames.Rows() : 0; }
  int64_t Dim() const { return frames.Rank() == 2 ? frames.Cols() : 0; }
};

// Output of stacking + subsampling; D_stack = stack * D_mel,
// T' = ceil(T / stride).
struct StackedFeatures {
  Tensor frames;  // [T' x D_stack]
  double covered_ms = 30.0;

  int64_t NumFrames() const { return frames.Rows(); }
  int64_t Dim() const { return frames.Cols(); }
};

// Single contiguous masked span over stacked frames.
struct MaskInfo {
  int64_t span_start = 0;
  int64_t span_len = 0;
  std::vector<bool> flags;  // true exactly on [span_start, span_start+span_len)
};

// Phoneme ids with per-position mask markers.
struct PhonemeSequence {
  std::vector<int32_t> ids;
  std::vector<bool> masked;  // same length as ids

  int64_t Size() const { return static_cast<int64_t>(ids.size()); }
};

// Output frame t concatenates input frames [t*stride - (stack-2),
// t*stride + 1]; positions outside the input are zero-padded.
StackedFeatures StackAndSubsample(const FeatureSequence& feats, int64_t stack,
                                  int64_t stride);

// Masks one span of floor(mask_ratio * T') frames, start uniform over valid
// positions, filling with N(0, 0.1^2) noise. Returns nullopt when T' is too
// short to host a span (the caller skips the example for masked prediction).
struct MaskedAudio {
  StackedFeatures masked;
  MaskInfo info;
};
std::optional<MaskedAudio> AudioMaskSpan(const StackedFeatures& sf,
                                         double mask_ratio, Rng& rng);

// Replaces contiguous spans (geometric length, mean 3) with mask_id until
// exactly floor(mask_ratio * |ph|) positions are masked.
PhonemeSequence PhonemeMask(const PhonemeSequence& ph, double mask_ratio,
                            int32_t mask_id, Rng& rng);

// Embedding lookup -> projection to the stacked-feature dimension -> each
// row repeated `upsample` times. Output length is upsample * |ph|.
Var TextFrontend(const PhonemeSequence& ph, Var embed_table, Var proj_w,
                 Var proj_b, int64_t upsample);

}  // namespace cascade

#endif  // CASCADE_FRONTEND_H_
