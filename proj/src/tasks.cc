// src/tasks.cc

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

#include "cascade/tasks.h"

namespace cascade {

CascadeLosses AsrLosses(ParamVars& pv, const ModelConfig& cfg,
                        const WordpieceModel& wpm,
                        const FeatureSequence& audio, const WordSeq& words) {
  CASCADE_CHECK_USAGE(!words.empty(), "AsrLosses: empty transcript");
  const std::vector<int32_t> targets = wpm.Encode(words);
  StackedFeatures sf = StackAndSubsample(audio, cfg.stack, cfg.stride);
  Var input = pv.tape().Constant(sf.frames);
  Var h_c = EncodeCausal(pv, cfg, input);
  Var h_nc = EncodeNonCausal(pv, cfg, h_c);
  return {TransducerLossVar(pv, "dec.c.", h_c, targets,
                            cfg.max_symbols_per_frame),
          TransducerLossVar(pv, "dec.nc.", h_nc, targets,
                            cfg.max_symbols_per_frame)};
}

CascadeLosses JoistLosses(ParamVars& pv, const ModelConfig& cfg,
                          const WordpieceModel& wpm, const G2p& g2p,
                          const WordSeq& words, Rng& mask_rng) {
  CASCADE_CHECK_USAGE(!words.empty(), "JoistLosses: empty text");
  const std::vector<int32_t> targets = wpm.Encode(words);
  // Text is phonemized before masking; targets stay unmasked.
  PhonemeSequence ph = g2p.Phonemize(words);
  PhonemeSequence masked =
      PhonemeMask(ph, cfg.text_mask_ratio, G2p::kMaskPhoneme, mask_rng);
  Var frontend_out =
      TextFrontend(masked, pv["frontend.text.embed"],
                   pv["frontend.text.proj.w"], pv["frontend.text.proj.b"],
                   cfg.text_upsample);
  Var h_c = EncodeCausal(pv, cfg, frontend_out);
  Var h_nc = EncodeNonCausal(pv, cfg, h_c);
  return {TransducerLossVar(pv, "dec.c.", h_c, targets,
                            cfg.max_symbols_per_frame),
          TransducerLossVar(pv, "dec.nc.", h_nc, targets,
                            cfg.max_symbols_per_frame)};
}

std::optional<BestRqOutput> BestRqLosses(ParamVars& pv, const ModelConfig& cfg,
                                         const Quantizer& quantizer,
                                         const FeatureSequence& audio,
                                         Rng& mask_rng) {
  StackedFeatures sf = StackAndSubsample(audio, cfg.stack, cfg.stride);
  // Targets come from the unmasked frames at the positions the encoder
  // consumes.
  const std::vector<int32_t> targets = Quantize(quantizer, sf);
  std::optional<MaskedAudio> ma =
      AudioMaskSpan(sf, cfg.audio_mask_ratio, mask_rng);
  if (!ma.has_value()) return std::nullopt;

  Var input = pv.tape().Constant(ma->masked.frames);
  Var h_c = EncodeCausal(pv, cfg, input);
  Var h_nc = EncodeNonCausal(pv, cfg, h_c);
  std::optional<Var> nc_loss = BestRqLoss(h_nc, targets, ma->info,
                                          pv["bestrq.head.w"],
                                          pv["bestrq.head.b"]);
  if (!nc_loss.has_value()) return std::nullopt;

  BestRqOutput out;
  if (cfg.bestrq_causal_head) {
    std::optional<Var> c_loss = BestRqLoss(h_c, targets, ma->info,
                                           pv["bestrq.head_c.w"],
                                           pv["bestrq.head_c.b"]);
    out.loss_causal = c_loss;
    out.loss = Scale(Add(*nc_loss, *c_loss), 0.5);
  } else {
    out.loss = *nc_loss;
  }
  return out;
}

}  // namespace cascade
