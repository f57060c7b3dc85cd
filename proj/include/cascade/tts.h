// include/cascade/tts.h

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

#ifndef CASCADE_TTS_H_
#define CASCADE_TTS_H_

#include <map>
#include <span>
#include <string>

#include "cascade/frontend.h"
#include "cascade/wordpiece.h"

namespace cascade {

// Deterministic synthetic speech oracle emitting acoustic features (never
// waveforms). Acts as the stand-in behind the pluggable synthesis
// interface: a real system with the same contract can replace it.
//
// Each vocabulary word owns a fixed feature template of 6-12 frames drawn
// from voice_seed; Synthesize concatenates templates and adds jitter from a
// stream seeded by (seed, text), so the same (text, seed) always produces
// bit-identical features. Two oracles sharing voice_seed speak with the
// same voice while producing independent jitter.
class TtsOracle {
 public:
  TtsOracle(std::span<const std::string> vocabulary, int64_t feature_dim,
            uint64_t voice_seed, uint64_t seed, double jitter_scale = 0.05,
            double frame_step_ms = 10.0);

  // Unknown words are a usage error; empty input gives an empty sequence.
  FeatureSequence Synthesize(const WordSeq& words) const;

  int64_t TemplateFrames(const std::string& word) const;
  int64_t feature_dim() const { return feature_dim_; }
  uint64_t seed() const { return seed_; }
  double jitter_scale() const { return jitter_scale_; }

 private:
  std::map<std::string, Tensor> templates_;
  int64_t feature_dim_;
  uint64_t seed_;
  double jitter_scale_;
  double frame_step_ms_;
};

// Adds seeded N(0, sigma^2) noise to every coordinate.
FeatureSequence AddFeatureNoise(const FeatureSequence& f, double sigma,
                                uint64_t seed);

}  // namespace cascade

#endif  // CASCADE_TTS_H_
