// tests/encoder_test.cc

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

#include <cmath>

#include "cascade/encoder.h"
#include "cascade/rng.h"
#include "doctest.h"

namespace cascade {
namespace {

ModelConfig TinyConfig() {
  ModelConfig cfg;
  cfg.feature_dim = 4;
  cfg.stack = 1;
  cfg.stride = 1;
  cfg.causal_layers = 1;
  cfg.noncausal_layers = 2;
  cfg.model_dim = 8;
  cfg.heads = 2;
  cfg.conv_kernel = 3;
  cfg.right_context_frames = 2;
  cfg.ffn_dim = 12;
  cfg.max_rel_offset = 4;
  cfg.vocab_size = 6;
  cfg.decoder_dim = 6;
  cfg.joint_dim = 6;
  cfg.quantizer_codebook = 4;
  cfg.quantizer_dim = 3;
  return cfg;
}

Tensor RandomInput(int64_t t, int64_t d, uint64_t seed) {
  Rng rng(seed);
  Tensor x({t, d});
  for (int64_t i = 0; i < x.NumElements(); ++i) x[i] = rng.Gaussian();
  return x;
}

Tensor RunCausal(const ParamStore& params, const ModelConfig& cfg,
                 const Tensor& input) {
  Tape tape;
  ParamVars pv(&tape, &params, false);
  return tape.Value(EncodeCausal(pv, cfg, tape.Constant(input)));
}

Tensor RunNonCausal(const ParamStore& params, const ModelConfig& cfg,
                    const Tensor& input) {
  Tape tape;
  ParamVars pv(&tape, &params, false);
  Var h = EncodeCausal(pv, cfg, tape.Constant(input));
  return tape.Value(EncodeNonCausal(pv, cfg, h));
}

TEST_SUITE_BEGIN("encoder");

TEST_CASE("block preserves shape and is deterministic") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 5);
  Tensor x = RandomInput(17, cfg.StackedDim(), 3);
  Tensor a = RunCausal(params, cfg, x);
  CHECK(a.Rows() == 17);
  CHECK(a.Cols() == cfg.model_dim);
  Tensor b = RunCausal(params, cfg, x);
  CHECK(a.data() == b.data());
  // Single-frame input gives a single-frame output.
  Tensor one = RunCausal(params, cfg, RandomInput(1, cfg.StackedDim(), 4));
  CHECK(one.Rows() == 1);
}

TEST_CASE("zeroed residual branches reduce a block to layer norm") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 6);
  // Zero every branch output projection in block enc.c0.
  for (const char* name :
       {"enc.c0.ffn1.out.w", "enc.c0.ffn1.out.b", "enc.c0.attn.o.w",
        "enc.c0.attn.o.b", "enc.c0.conv.point.w", "enc.c0.conv.point.b",
        "enc.c0.ffn2.out.w", "enc.c0.ffn2.out.b"}) {
    Tensor& t = params.GetMutable(name);
    for (int64_t i = 0; i < t.NumElements(); ++i) t[i] = 0.0;
  }
  Tensor x = RandomInput(5, cfg.model_dim, 7);
  Tape tape;
  ParamVars pv(&tape, &params, false);
  Var out = ConformerBlock(pv, cfg, "enc.c0.", tape.Constant(x), 0);
  Var ln = LayerNorm(tape.Constant(x), pv["enc.c0.out.ln.g"],
                     pv["enc.c0.out.ln.b"]);
  for (int64_t i = 0; i < x.NumElements(); ++i)
    CHECK(tape.Value(out)[i] == doctest::Approx(tape.Value(ln)[i])
                                    .epsilon(1e-15));
}

TEST_CASE("causal encoder is prefix-stable under suffix extension") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 8);
  for (uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(DeriveSeed(31, "probe", trial));
    const int64_t t = 3 + static_cast<int64_t>(rng.UniformInt(0, 9));
    Tensor x = RandomInput(t, cfg.StackedDim(), 100 + trial);
    Tensor base = RunCausal(params, cfg, x);
    // Append random future frames; earlier outputs must not move at all.
    const int64_t extra = 1 + static_cast<int64_t>(rng.UniformInt(0, 4));
    Tensor ext({t + extra, cfg.StackedDim()});
    std::copy(x.data().begin(), x.data().end(), ext.data().begin());
    for (int64_t i = x.NumElements(); i < ext.NumElements(); ++i)
      ext[i] = rng.Gaussian();
    Tensor long_out = RunCausal(params, cfg, ext);
    for (int64_t f = 0; f < t; ++f)
      for (int64_t c = 0; c < cfg.model_dim; ++c)
        CHECK(base.At(f, c) == long_out.At(f, c));
  }
}

TEST_CASE("non-causal encoder sees at most the right-context budget") {
  ModelConfig cfg = TinyConfig();
  cfg.right_context_frames = 3;
  ParamStore params = InitModelParams(cfg, 12);
  const int64_t t = 12;
  for (uint64_t trial = 0; trial < 20; ++trial) {
    Tensor x = RandomInput(t, cfg.StackedDim(), 500 + trial);
    Tensor base = RunNonCausal(params, cfg, x);
    // Perturb one frame; outputs more than right_context before it must be
    // bit-identical, and some earlier frame within the window must move.
    Rng rng(DeriveSeed(77, "perturb", trial));
    const int64_t p = static_cast<int64_t>(
        rng.UniformInt(cfg.right_context_frames + 1, t - 1));
    Tensor y = x;
    for (int64_t c = 0; c < cfg.StackedDim(); ++c)
      y.At(p, c) += 1.0 + rng.Uniform();
    Tensor pert = RunNonCausal(params, cfg, y);
    for (int64_t f = 0; f < p - cfg.right_context_frames; ++f)
      for (int64_t c = 0; c < cfg.model_dim; ++c)
        CHECK(base.At(f, c) == pert.At(f, c));
  }
}

TEST_CASE("perturbation inside the window does reach the output") {
  ModelConfig cfg = TinyConfig();
  cfg.right_context_frames = 3;
  ParamStore params = InitModelParams(cfg, 13);
  Tensor x = RandomInput(10, cfg.StackedDim(), 9);
  Tensor base = RunNonCausal(params, cfg, x);
  Tensor y = x;
  for (int64_t c = 0; c < cfg.StackedDim(); ++c) y.At(5, c) += 2.0;
  Tensor pert = RunNonCausal(params, cfg, y);
  // Frame 5 - 3 = 2 is allowed to see the perturbation.
  double diff = 0.0;
  for (int64_t c = 0; c < cfg.model_dim; ++c)
    diff += std::abs(base.At(2, c) - pert.At(2, c));
  CHECK(diff > 0.0);
}

TEST_CASE("zero right context behaves causally") {
  ModelConfig cfg = TinyConfig();
  cfg.right_context_frames = 0;
  ParamStore params = InitModelParams(cfg, 14);
  Tensor x = RandomInput(8, cfg.StackedDim(), 77);
  Tensor base = RunNonCausal(params, cfg, x);
  Tensor ext({11, cfg.StackedDim()});
  std::copy(x.data().begin(), x.data().end(), ext.data().begin());
  Rng rng(123);
  for (int64_t i = x.NumElements(); i < ext.NumElements(); ++i)
    ext[i] = rng.Gaussian();
  Tensor long_out = RunNonCausal(params, cfg, ext);
  for (int64_t f = 0; f < 8; ++f)
    for (int64_t c = 0; c < cfg.model_dim; ++c)
      CHECK(base.At(f, c) == long_out.At(f, c));
}

TEST_CASE("production constants give 30 frames of right context") {
  // 900ms at 30ms per stacked frame.
  ModelConfig cfg;
  const double covered_ms = cfg.stride * cfg.frame_step_ms;
  CHECK(covered_ms == doctest::Approx(30.0));
  CHECK(static_cast<int64_t>(900.0 / covered_ms) == cfg.right_context_frames);
}

TEST_CASE("parameter count is stable across runs and seeds") {
  ModelConfig cfg = TinyConfig();
  ParamStore a = InitModelParams(cfg, 1);
  ParamStore b = InitModelParams(cfg, 2);
  CHECK(a.TotalParameters() == b.TotalParameters());
  ParamStore c = InitModelParams(cfg, 1);
  CHECK(a.TotalParameters() == c.TotalParameters());
  // Desk-default configuration parameter count, reported for the record.
  ModelConfig desk;
  ParamStore d = InitModelParams(desk, 3);
  MESSAGE("desk-default parameters: ", d.TotalParameters());
  CHECK(d.TotalParameters() > 0);
}

TEST_SUITE_END();

}  // namespace
}  // namespace cascade
