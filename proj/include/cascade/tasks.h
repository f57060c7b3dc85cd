// include/cascade/tasks.h

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

#ifndef CASCADE_TASKS_H_
#define CASCADE_TASKS_H_

#include <optional>

#include "cascade/encoder.h"
#include "cascade/frontend.h"
#include "cascade/g2p.h"
#include "cascade/model.h"
#include "cascade/ssl.h"
#include "cascade/transducer.h"
#include "cascade/wordpiece.h"

namespace cascade {

// Causal and non-causal transducer losses sharing one causal encoding.
struct CascadeLosses {
  Var causal;
  Var noncausal;
};

// Audio -> stacked features -> E_C -> D_C loss, and E_C -> E_NC -> D_NC
// loss, against the wordpiece encoding of `words`. Used by supervised ASR
// and, on synthesized features, by the text-to-speech augmentation path.
CascadeLosses AsrLosses(ParamVars& pv, const ModelConfig& cfg,
                        const WordpieceModel& wpm,
                        const FeatureSequence& audio, const WordSeq& words);

// Text injection: phonemes -> span mask -> text frontend (upsampled by
// repetition) -> shared encoders -> both decoders, against the unmasked
// wordpiece targets.
CascadeLosses JoistLosses(ParamVars& pv, const ModelConfig& cfg,
                          const WordpieceModel& wpm, const G2p& g2p,
                          const WordSeq& words, Rng& mask_rng);

// Masked-prediction losses: quantized targets from the unmasked stacked
// frames, one masked span, cross-entropy on the non-causal encoding (plus
// optionally the causal one). nullopt when the utterance is too short to
// mask.
struct BestRqOutput {
  Var loss;                      // mean of the attached heads
  std::optional<Var> loss_causal;  // present when the causal head is on
};
std::optional<BestRqOutput> BestRqLosses(ParamVars& pv, const ModelConfig& cfg,
                                         const Quantizer& quantizer,
                                         const FeatureSequence& audio,
                                         Rng& mask_rng);

}  // namespace cascade

#endif  // CASCADE_TASKS_H_
