// src/frontend.cc

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

#include "cascade/frontend.h"

#include <cmath>

namespace cascade {

StackedFeatures StackAndSubsample(const FeatureSequence& feats, int64_t stack,
                                  int64_t stride) {
  CASCADE_CHECK_USAGE(stack >= 1 && stride >= 1,
                      "StackAndSubsample: stack and stride must be >= 1");
  const int64_t t_in = feats.NumFrames();
  CASCADE_CHECK_USAGE(t_in >= 1, "StackAndSubsample: empty input");
  const int64_t d_mel = feats.Dim();
  const int64_t t_out = (t_in + stride - 1) / stride;  // ceil(T / stride)

  StackedFeatures out;
  out.frames = Tensor({t_out, stack * d_mel});
  out.covered_ms = static_cast<double>(stride) * feats.frame_step_ms;
  for (int64_t t = 0; t < t_out; ++t) {
    // Window [t*stride - (stack-2), t*stride + 1], one frame of lookahead.
    const int64_t first = t * stride - (stack - 2);
    for (int64_t j = 0; j < stack; ++j) {
      const int64_t src = first + j;
      if (src < 0 || src >= t_in) continue;  // zero padding
      for (int64_t c = 0; c < d_mel; ++c)
        out.frames.At(t, j * d_mel + c) = feats.frames.At(src, c);
    }
  }
  return out;
}

std::optional<MaskedAudio> AudioMaskSpan(const StackedFeatures& sf,
                                         double mask_ratio, Rng& rng) {
  CASCADE_CHECK_USAGE(mask_ratio > 0.0 && mask_ratio < 1.0,
                      "AudioMaskSpan: mask_ratio must be in (0, 1)");
  const int64_t t = sf.NumFrames();
  const int64_t span_len =
      static_cast<int64_t>(std::floor(mask_ratio * static_cast<double>(t)));
  if (span_len < 1) return std::nullopt;  // too short; caller skips

  MaskedAudio ma;
  ma.masked = sf;
  ma.info.span_len = span_len;
  ma.info.span_start = rng.UniformInt(0, t - span_len);
  ma.info.flags.assign(t, false);
  const int64_t d = sf.Dim();
  for (int64_t i = ma.info.span_start; i < ma.info.span_start + span_len;
       ++i) {
    ma.info.flags[i] = true;
    for (int64_t c = 0; c < d; ++c)
      ma.masked.frames.At(i, c) = 0.1 * rng.Gaussian();
  }
  return ma;
}

PhonemeSequence PhonemeMask(const PhonemeSequence& ph, double mask_ratio,
                            int32_t mask_id, Rng& rng) {
  CASCADE_CHECK_USAGE(mask_ratio >= 0.0 && mask_ratio < 1.0,
                      "PhonemeMask: mask_ratio must be in [0, 1)");
  PhonemeSequence out = ph;
  out.masked.assign(ph.ids.size(), false);
  const int64_t n = ph.Size();
  const int64_t target =
      static_cast<int64_t>(std::floor(mask_ratio * static_cast<double>(n)));
  int64_t masked = 0;
  while (masked < target) {
    const int64_t remaining = target - masked;
    // Geometric span length with mean 3 (p = 1/3), resampled on overshoot.
    int64_t len;
    do {
      len = 1;
      while (rng.Uniform() >= 1.0 / 3.0) ++len;
    } while (len > remaining);
    const int64_t start = rng.UniformInt(0, n - len);
    for (int64_t i = start; i < start + len; ++i) {
      if (out.masked[i]) continue;
      out.masked[i] = true;
      out.ids[i] = mask_id;
      ++masked;
    }
  }
  return out;
}

Var TextFrontend(const PhonemeSequence& ph, Var embed_table, Var proj_w,
                 Var proj_b, int64_t upsample) {
  CASCADE_CHECK_USAGE(upsample >= 1, "TextFrontend: upsample must be >= 1");
  Var emb = Embedding(embed_table, ph.ids);
  Var projected = AddRowVec(MatMul(emb, proj_w), proj_b);
  if (upsample == 1) return projected;
  return RepeatRows(projected, upsample);
}

}  // namespace cascade
