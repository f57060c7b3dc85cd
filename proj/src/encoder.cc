// src/encoder.cc

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

#include "cascade/encoder.h"

#include <cmath>
#include <limits>

namespace cascade {

namespace {

// 0 where source position s <= t + lookahead, -inf elsewhere.
Tensor AttentionMask(int64_t frames, int64_t lookahead) {
  Tensor m({frames, frames});
  const double ninf = -std::numeric_limits<double>::infinity();
  for (int64_t t = 0; t < frames; ++t)
    for (int64_t s = 0; s < frames; ++s)
      if (s > t + lookahead) m.At(t, s) = ninf;
  return m;
}

Var FeedForward(ParamVars& pv, const std::string& prefix, Var x) {
  Var h = Tanh(AddRowVec(MatMul(x, pv[prefix + ".in.w"]), pv[prefix + ".in.b"]));
  return AddRowVec(MatMul(h, pv[prefix + ".out.w"]), pv[prefix + ".out.b"]);
}

Var SelfAttention(ParamVars& pv, const ModelConfig& cfg,
                  const std::string& prefix, Var x, int64_t lookahead) {
  Tape& t = pv.tape();
  const int64_t frames = t.Value(x).Rows();
  const int64_t head_dim = cfg.model_dim / cfg.heads;
  Var mask = t.Constant(AttentionMask(frames, lookahead));
  Var q = AddRowVec(MatMul(x, pv[prefix + "q.w"]), pv[prefix + "q.b"]);
  Var k = AddRowVec(MatMul(x, pv[prefix + "k.w"]), pv[prefix + "k.b"]);
  Var v = AddRowVec(MatMul(x, pv[prefix + "v.w"]), pv[prefix + "v.b"]);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Var> heads;
  for (int64_t h = 0; h < cfg.heads; ++h) {
    Var qh = SliceCols(q, h * head_dim, head_dim);
    Var kh = SliceCols(k, h * head_dim, head_dim);
    Var vh = SliceCols(v, h * head_dim, head_dim);
    Var scores = Scale(MatMul(qh, Transpose(kh)), inv_sqrt);
    scores = AddRelPosBias(scores, pv[prefix + "rel" + std::to_string(h)],
                           cfg.max_rel_offset);
    scores = Add(scores, mask);
    heads.push_back(MatMul(RowSoftmax(scores), vh));
  }
  Var ctx = ConcatCols(heads);
  return AddRowVec(MatMul(ctx, pv[prefix + "o.w"]), pv[prefix + "o.b"]);
}

// Depthwise conv over time with taps on [t - kernel + 1, t], then a
// pointwise projection.
Var ConvModule(ParamVars& pv, const ModelConfig& cfg,
               const std::string& prefix, Var x) {
  Tape& t = pv.tape();
  Var depth = pv[prefix + "depth"];
  Var acc;
  for (int64_t j = 0; j < cfg.conv_kernel; ++j) {
    // Tap j multiplies x at offset -(kernel-1-j).
    Var tap_w = Reshape(SliceCols(Transpose(depth), j, 1), {cfg.model_dim});
    Var shifted = ShiftRows(x, cfg.conv_kernel - 1 - j);
    Var term = MulRowVec(shifted, tap_w);
    acc = (j == 0) ? term : Add(acc, term);
  }
  (void)t;
  Var act = Tanh(AddRowVec(acc, pv[prefix + "depth_b"]));
  return AddRowVec(MatMul(act, pv[prefix + "point.w"]),
                   pv[prefix + "point.b"]);
}

}  // namespace

Var ConformerBlock(ParamVars& pv, const ModelConfig& cfg,
                   const std::string& prefix, Var x, int64_t lookahead) {
  Var h = x;
  h = Add(h, Scale(FeedForward(pv, prefix + "ffn1",
                               LayerNorm(h, pv[prefix + "ffn1.ln.g"],
                                         pv[prefix + "ffn1.ln.b"])),
                   0.5));
  h = Add(h, SelfAttention(pv, cfg, prefix + "attn.",
                           LayerNorm(h, pv[prefix + "attn.ln.g"],
                                     pv[prefix + "attn.ln.b"]),
                           lookahead));
  h = Add(h, ConvModule(pv, cfg, prefix + "conv.",
                        LayerNorm(h, pv[prefix + "conv.ln.g"],
                                  pv[prefix + "conv.ln.b"])));
  h = Add(h, Scale(FeedForward(pv, prefix + "ffn2",
                               LayerNorm(h, pv[prefix + "ffn2.ln.g"],
                                         pv[prefix + "ffn2.ln.b"])),
                   0.5));
  return LayerNorm(h, pv[prefix + "out.ln.g"], pv[prefix + "out.ln.b"]);
}

Var EncodeCausal(ParamVars& pv, const ModelConfig& cfg, Var frontend_out) {
  CASCADE_CHECK_USAGE(pv.tape().Value(frontend_out).Rows() >= 1,
                      "EncodeCausal: empty input");
  Var h = AddRowVec(MatMul(frontend_out, pv["enc.in_proj.w"]),
                    pv["enc.in_proj.b"]);
  for (int64_t i = 0; i < cfg.causal_layers; ++i)
    h = ConformerBlock(pv, cfg, "enc.c" + std::to_string(i) + ".", h,
                       /*lookahead=*/0);
  return h;
}

Var EncodeNonCausal(ParamVars& pv, const ModelConfig& cfg, Var causal_out) {
  CASCADE_CHECK_USAGE(pv.tape().Value(causal_out).Rows() >= 1,
                      "EncodeNonCausal: empty input");
  // The right-context budget is a stack-wide total, so per-layer lookahead
  // sums to exactly right_context_frames.
  const int64_t layers = cfg.noncausal_layers;
  const int64_t base = cfg.right_context_frames / layers;
  const int64_t extra = cfg.right_context_frames % layers;
  Var h = causal_out;
  for (int64_t i = 0; i < layers; ++i) {
    const int64_t lookahead = base + (i < extra ? 1 : 0);
    h = ConformerBlock(pv, cfg, "enc.nc" + std::to_string(i) + ".", h,
                       lookahead);
  }
  return h;
}

}  // namespace cascade
