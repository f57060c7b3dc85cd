// src/model.cc

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

#include "cascade/model.h"

#include <cmath>

#include "cascade/g2p.h"
#include "cascade/rng.h"
#include "cascade/ssl.h"

namespace cascade {

void ModelConfig::Validate() const {
  CASCADE_CHECK_USAGE(feature_dim >= 1, "feature_dim must be >= 1");
  CASCADE_CHECK_USAGE(stack >= 1 && stride >= 1, "stack/stride must be >= 1");
  CASCADE_CHECK_USAGE(audio_mask_ratio > 0 && audio_mask_ratio < 1,
                      "audio_mask_ratio must be in (0, 1)");
  CASCADE_CHECK_USAGE(text_mask_ratio >= 0 && text_mask_ratio < 1,
                      "text_mask_ratio must be in [0, 1)");
  CASCADE_CHECK_USAGE(text_upsample >= 1, "text_upsample must be >= 1");
  CASCADE_CHECK_USAGE(causal_layers >= 1 && noncausal_layers >= 1,
                      "encoder layer counts must be >= 1");
  CASCADE_CHECK_USAGE(model_dim % heads == 0,
                      "model_dim must be divisible by heads");
  CASCADE_CHECK_USAGE(conv_kernel >= 1, "conv_kernel must be >= 1");
  CASCADE_CHECK_USAGE(right_context_frames >= 0,
                      "right_context_frames must be >= 0");
  CASCADE_CHECK_USAGE(vocab_size >= 3, "vocab_size must be >= 3");
  CASCADE_CHECK_USAGE(decoder_dim >= 1 && joint_dim >= 1,
                      "decoder/joint dims must be >= 1");
  CASCADE_CHECK_USAGE(max_symbols_per_frame >= 1,
                      "max_symbols_per_frame must be >= 1");
  CASCADE_CHECK_USAGE(quantizer_codebook >= 2, "quantizer needs K >= 2");
  CASCADE_CHECK_USAGE(quantizer_dim >= 1, "quantizer_dim must be >= 1");
}

void ParamStore::Add(const std::string& name, Tensor value, bool frozen) {
  CASCADE_CHECK_USAGE(params_.emplace(name, std::move(value)).second,
                      "duplicate parameter: ", name);
  if (frozen) frozen_.insert(name);
}

const Tensor& ParamStore::Get(const std::string& name) const {
  auto it = params_.find(name);
  CASCADE_CHECK_USAGE(it != params_.end(), "unknown parameter: ", name);
  return it->second;
}

Tensor& ParamStore::GetMutable(const std::string& name) {
  auto it = params_.find(name);
  CASCADE_CHECK_USAGE(it != params_.end(), "unknown parameter: ", name);
  return it->second;
}

int64_t ParamStore::TotalParameters() const {
  int64_t n = 0;
  for (const auto& [name, t] : params_) n += t.NumElements();
  return n;
}

namespace {

Tensor RandomInit(std::vector<int64_t> shape, Rng& rng, double std) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.NumElements(); ++i) t[i] = std * rng.Gaussian();
  return t;
}

void AddLinear(ParamStore& p, Rng& rng, const std::string& prefix,
               int64_t in_dim, int64_t out_dim) {
  p.Add(prefix + ".w", RandomInit({in_dim, out_dim}, rng,
                                  1.0 / std::sqrt(double(in_dim))));
  p.Add(prefix + ".b", Tensor({out_dim}));
}

void AddLayerNorm(ParamStore& p, const std::string& prefix, int64_t dim) {
  Tensor gain({dim});
  for (int64_t i = 0; i < dim; ++i) gain[i] = 1.0;
  p.Add(prefix + ".g", std::move(gain));
  p.Add(prefix + ".b", Tensor({dim}));
}

void AddConformerBlock(ParamStore& p, Rng& rng, const ModelConfig& cfg,
                       const std::string& prefix) {
  const int64_t d = cfg.model_dim;
  AddLayerNorm(p, prefix + "ffn1.ln", d);
  AddLinear(p, rng, prefix + "ffn1.in", d, cfg.ffn_dim);
  AddLinear(p, rng, prefix + "ffn1.out", cfg.ffn_dim, d);
  AddLayerNorm(p, prefix + "attn.ln", d);
  AddLinear(p, rng, prefix + "attn.q", d, d);
  AddLinear(p, rng, prefix + "attn.k", d, d);
  AddLinear(p, rng, prefix + "attn.v", d, d);
  AddLinear(p, rng, prefix + "attn.o", d, d);
  for (int64_t h = 0; h < cfg.heads; ++h)
    p.Add(prefix + "attn.rel" + std::to_string(h),
          Tensor({2 * cfg.max_rel_offset + 1}));
  AddLayerNorm(p, prefix + "conv.ln", d);
  p.Add(prefix + "conv.depth",
        RandomInit({cfg.conv_kernel, d}, rng,
                   1.0 / std::sqrt(double(cfg.conv_kernel))));
  p.Add(prefix + "conv.depth_b", Tensor({d}));
  AddLinear(p, rng, prefix + "conv.point", d, d);
  AddLayerNorm(p, prefix + "ffn2.ln", d);
  AddLinear(p, rng, prefix + "ffn2.in", d, cfg.ffn_dim);
  AddLinear(p, rng, prefix + "ffn2.out", cfg.ffn_dim, d);
  AddLayerNorm(p, prefix + "out.ln", d);
}

void AddDecoder(ParamStore& p, Rng& rng, const ModelConfig& cfg,
                const std::string& prefix) {
  const int64_t d = cfg.decoder_dim;
  p.Add(prefix + "embed",
        RandomInit({cfg.vocab_size, d}, rng, 1.0 / std::sqrt(double(d))));
  p.Add(prefix + "rnn.wx", RandomInit({d, d}, rng, 1.0 / std::sqrt(double(d))));
  p.Add(prefix + "rnn.wr", RandomInit({d, d}, rng, 1.0 / std::sqrt(double(d))));
  p.Add(prefix + "rnn.b", Tensor({d}));
  p.Add(prefix + "rnn.h0", RandomInit({1, d}, rng, 0.1));
  p.Add(prefix + "joint.we",
        RandomInit({cfg.model_dim, cfg.joint_dim}, rng,
                   1.0 / std::sqrt(double(cfg.model_dim))));
  p.Add(prefix + "joint.wg",
        RandomInit({d, cfg.joint_dim}, rng, 1.0 / std::sqrt(double(d))));
  p.Add(prefix + "joint.b", Tensor({cfg.joint_dim}));
  AddLinear(p, rng, prefix + "joint.blank", cfg.joint_dim, 1);
  AddLinear(p, rng, prefix + "joint.label", cfg.joint_dim, cfg.vocab_size - 1);
}

}  // namespace

ParamStore InitModelParams(const ModelConfig& cfg, uint64_t seed) {
  cfg.Validate();
  ParamStore p;
  Rng rng(DeriveSeed(seed, "model-init"));

  p.Add("frontend.text.embed",
        RandomInit({G2p::kInventorySize, cfg.text_embed_dim}, rng,
                   1.0 / std::sqrt(double(cfg.text_embed_dim))));
  AddLinear(p, rng, "frontend.text.proj", cfg.text_embed_dim,
            cfg.StackedDim());
  AddLinear(p, rng, "enc.in_proj", cfg.StackedDim(), cfg.model_dim);
  for (int64_t i = 0; i < cfg.causal_layers; ++i)
    AddConformerBlock(p, rng, cfg, "enc.c" + std::to_string(i) + ".");
  for (int64_t i = 0; i < cfg.noncausal_layers; ++i)
    AddConformerBlock(p, rng, cfg, "enc.nc" + std::to_string(i) + ".");
  AddDecoder(p, rng, cfg, "dec.c.");
  AddDecoder(p, rng, cfg, "dec.nc.");
  AddLinear(p, rng, "bestrq.head", cfg.model_dim, cfg.quantizer_codebook);
  if (cfg.bestrq_causal_head)
    AddLinear(p, rng, "bestrq.head_c", cfg.model_dim, cfg.quantizer_codebook);

  Quantizer q = InitQuantizer(DeriveSeed(seed, "quantizer"), cfg.StackedDim(),
                              cfg.quantizer_dim, cfg.quantizer_codebook);
  p.Add("quantizer.proj", std::move(q.projection), /*frozen=*/true);
  p.Add("quantizer.codebook", std::move(q.codebook), /*frozen=*/true);
  return p;
}

Var ParamVars::operator[](const std::string& name) {
  auto it = vars_.find(name);
  if (it != vars_.end()) return it->second;
  const bool rg = trainable_ && !store_->IsFrozen(name);
  Var v = tape_->Leaf(store_->Get(name), rg);
  vars_.emplace(name, v);
  return v;
}

std::map<std::string, Tensor> ParamVars::CollectGrads() const {
  std::map<std::string, Tensor> grads;
  for (const auto& [name, var] : vars_) {
    if (tape_->RequiresGrad(var) && tape_->HasGrad(var))
      grads.emplace(name, tape_->Grad(var));
  }
  return grads;
}

}  // namespace cascade
