// include/cascade/encoder.h

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

#ifndef CASCADE_ENCODER_H_
#define CASCADE_ENCODER_H_

#include <string>

#include "cascade/model.h"

namespace cascade {

// One conformer-lite block: half-step feed-forward, masked self-attention
// with a learned per-offset bias, left-padded depthwise convolution,
// half-step feed-forward, final layer norm. `lookahead` bounds how many
// future positions attention may see (0 = strictly causal); convolution is
// always left-only.
Var ConformerBlock(ParamVars& pv, const ModelConfig& cfg,
                   const std::string& prefix, Var x, int64_t lookahead);

// Input projection from the stacked-feature space followed by the causal
// stack. Output at frame t depends only on input frames [0, t].
Var EncodeCausal(ParamVars& pv, const ModelConfig& cfg, Var frontend_out);

// Non-causal continuation. The right-context budget is a single global
// lookahead total: it is split across the layers so that output frame t
// depends only on input frames [0, t + right_context_frames].
Var EncodeNonCausal(ParamVars& pv, const ModelConfig& cfg, Var causal_out);

}  // namespace cascade

#endif  // CASCADE_ENCODER_H_
