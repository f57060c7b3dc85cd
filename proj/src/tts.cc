// src/tts.cc

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

#include "cascade/tts.h"

namespace cascade {

TtsOracle::TtsOracle(std::span<const std::string> vocabulary,
                     int64_t feature_dim, uint64_t voice_seed, uint64_t seed,
                     double jitter_scale, double frame_step_ms)
    : feature_dim_(feature_dim),
      seed_(seed),
      jitter_scale_(jitter_scale),
      frame_step_ms_(frame_step_ms) {
  CASCADE_CHECK_USAGE(feature_dim >= 1, "TtsOracle: feature_dim must be >= 1");
  for (const std::string& w : vocabulary) {
    Rng rng(DeriveSeed(voice_seed, w));
    const int64_t frames = 6 + static_cast<int64_t>(rng.UniformInt(0, 6));
    Tensor tpl({frames, feature_dim});
    for (int64_t i = 0; i < tpl.NumElements(); ++i) tpl[i] = rng.Gaussian();
    templates_.emplace(w, std::move(tpl));
  }
}

int64_t TtsOracle::TemplateFrames(const std::string& word) const {
  auto it = templates_.find(word);
  CASCADE_CHECK_USAGE(it != templates_.end(),
                      "TtsOracle: unknown token: ", word);
  return it->second.Rows();
}

FeatureSequence TtsOracle::Synthesize(const WordSeq& words) const {
  int64_t total = 0;
  std::vector<const Tensor*> parts;
  parts.reserve(words.size());
  for (const std::string& w : words) {
    auto it = templates_.find(w);
    CASCADE_CHECK_USAGE(it != templates_.end(),
                        "TtsOracle: unknown token: ", w);
    parts.push_back(&it->second);
    total += it->second.Rows();
  }

  FeatureSequence out;
  out.frame_step_ms = frame_step_ms_;
  out.frames = Tensor({total, feature_dim_});
  int64_t row = 0;
  for (const Tensor* tpl : parts) {
    std::copy(tpl->data().begin(), tpl->data().end(),
              out.frames.data().begin() + row * feature_dim_);
    row += tpl->Rows();
  }

  std::string text;
  for (const std::string& w : words) {
    text += w;
    text += ' ';
  }
  Rng jitter(DeriveSeed(seed_, text));
  for (int64_t i = 0; i < out.frames.NumElements(); ++i)
    out.frames[i] += jitter_scale_ * jitter.Gaussian();
  return out;
}

FeatureSequence AddFeatureNoise(const FeatureSequence& f, double sigma,
                                uint64_t seed) {
  FeatureSequence out = f;
  Rng rng(seed);
  for (int64_t i = 0; i < out.frames.NumElements(); ++i)
    out.frames[i] += sigma * rng.Gaussian();
  return out;
}

}  // namespace cascade
