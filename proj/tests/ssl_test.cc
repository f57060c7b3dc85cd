// tests/ssl_test.cc

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

#include "cascade/tasks.h"
#include "doctest.h"

namespace cascade {
namespace {

TEST_SUITE_BEGIN("ssl");

TEST_CASE("quantizer init determinism, norms, and shapes") {
  Quantizer a = InitQuantizer(42, 64, 16, 256);
  Quantizer b = InitQuantizer(42, 64, 16, 256);
  CHECK(a.projection.data() == b.projection.data());
  CHECK(a.codebook.data() == b.codebook.data());
  CHECK(a.projection.Rows() == 64);
  CHECK(a.projection.Cols() == 16);
  CHECK(a.codebook.Rows() == 256);
  CHECK(a.codebook.Cols() == 16);
  for (int64_t r = 0; r < a.codebook.Rows(); ++r) {
    double norm = 0.0;
    for (int64_t c = 0; c < 16; ++c)
      norm += a.codebook.At(r, c) * a.codebook.At(r, c);
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-12);
  }
  Quantizer c = InitQuantizer(43, 64, 16, 256);
  CHECK(c.projection.data() != a.projection.data());
}

TEST_CASE("quantize returns the exact-match entry and breaks ties low") {
  // Identity-ish projection so frames land directly in code space.
  Quantizer q;
  q.projection = Tensor({3, 3});
  for (int64_t i = 0; i < 3; ++i) q.projection.At(i, i) = 1.0;
  q.codebook = Tensor({4, 3});
  // Unit rows along axes; rows 2 and 3 are duplicates.
  q.codebook.At(0, 0) = 1.0;
  q.codebook.At(1, 1) = 1.0;
  q.codebook.At(2, 2) = 1.0;
  q.codebook.At(3, 2) = 1.0;

  StackedFeatures sf{Tensor({3, 3}, {5, 0, 0, 0, 0, 7, 0, 0, 0}), 30.0};
  std::vector<int32_t> idx = Quantize(q, sf);
  CHECK(idx[0] == 0);  // normalizes to exactly row 0
  CHECK(idx[1] == 2);  // nearest rows 2 and 3 tie; lower index wins
  // Zero frame stays zero and ties across all rows resolve to index 0.
  CHECK(idx[2] == 0);
  CHECK(q.quantize_calls == 1);
}

TEST_CASE("quantize equals the exhaustive nearest-neighbor scan") {
  Quantizer q = InitQuantizer(7, 24, 8, 64);
  Rng rng(91);
  StackedFeatures sf{Tensor({1000, 24}), 30.0};
  for (int64_t i = 0; i < sf.frames.NumElements(); ++i)
    sf.frames[i] = rng.Gaussian();
  std::vector<int32_t> got = Quantize(q, sf);
  for (int64_t t = 0; t < 1000; ++t) {
    // Independent O(K*d) scan.
    std::vector<double> v(8, 0.0);
    double norm = 0.0;
    for (int64_t c = 0; c < 8; ++c) {
      for (int64_t i = 0; i < 24; ++i)
        v[c] += sf.frames.At(t, i) * q.projection.At(i, c);
      norm += v[c] * v[c];
    }
    norm = std::sqrt(norm);
    if (norm > 0)
      for (double& x : v) x /= norm;
    int32_t best = 0;
    double best_d = 1e300;
    for (int64_t r = 0; r < 64; ++r) {
      double d = 0;
      for (int64_t c = 0; c < 8; ++c) {
        double diff = v[c] - q.codebook.At(r, c);
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = static_cast<int32_t>(r);
      }
    }
    REQUIRE(got[t] == best);
  }
}

TEST_CASE("masked-prediction loss analytic values") {
  const int64_t k = 16, dim = 8, frames = 10;
  Rng rng(3);
  Tensor h({frames, dim});
  for (int64_t i = 0; i < h.NumElements(); ++i) h[i] = rng.Gaussian();
  std::vector<int32_t> targets(frames, 5);
  MaskInfo info;
  info.span_start = 2;
  info.span_len = 3;
  info.flags.assign(frames, false);
  for (int64_t i = 2; i < 5; ++i) info.flags[i] = true;

  // Zero head: uniform over K, so loss is ln K.
  {
    Tape t;
    Var hw = t.Leaf(Tensor({dim, k}), false);
    Var hb = t.Leaf(Tensor({k}), false);
    auto loss = BestRqLoss(t.Leaf(h, false), targets, info, hw, hb);
    REQUIRE(loss.has_value());
    CHECK(t.Value(*loss)[0] ==
          doctest::Approx(std::log(double(k))).epsilon(1e-12));
  }
  // Head putting almost all mass on the target: loss near 0.
  {
    Tape t;
    Tensor hb(std::vector<int64_t>{k});
    hb[5] = 200.0;
    auto loss = BestRqLoss(t.Leaf(h, false), targets, info,
                           t.Leaf(Tensor({dim, k}), false),
                           t.Leaf(hb, false));
    REQUIRE(loss.has_value());
    CHECK(t.Value(*loss)[0] == doctest::Approx(0.0).epsilon(1e-12));
  }
  // No masked frames: skip signal.
  {
    Tape t;
    MaskInfo none;
    none.flags.assign(frames, false);
    auto loss = BestRqLoss(t.Leaf(h, false), targets, none,
                           t.Leaf(Tensor({dim, k}), false),
                           t.Leaf(Tensor({k}), false));
    CHECK(!loss.has_value());
  }
}

TEST_CASE("masked-prediction gradient vanishes outside the span") {
  const int64_t k = 8, dim = 6, frames = 12;
  Rng rng(5);
  Tensor h({frames, dim});
  Tensor hw({dim, k});
  Tensor hb({k});
  for (int64_t i = 0; i < h.NumElements(); ++i) h[i] = rng.Gaussian();
  for (int64_t i = 0; i < hw.NumElements(); ++i) hw[i] = rng.Gaussian();
  std::vector<int32_t> targets;
  for (int64_t i = 0; i < frames; ++i)
    targets.push_back(static_cast<int32_t>(rng.UniformInt(0, k - 1)));
  MaskInfo info;
  info.span_start = 4;
  info.span_len = 3;
  info.flags.assign(frames, false);
  for (int64_t i = 4; i < 7; ++i) info.flags[i] = true;

  Tape t;
  Var hv = t.Leaf(h, true);
  auto loss = BestRqLoss(hv, targets, info, t.Leaf(hw, true),
                         t.Leaf(hb, true));
  REQUIRE(loss.has_value());
  t.Backward(*loss);
  const Tensor& grad = t.Grad(hv);
  for (int64_t f = 0; f < frames; ++f) {
    double row = 0.0;
    for (int64_t c = 0; c < dim; ++c) row += std::abs(grad.At(f, c));
    if (info.flags[static_cast<size_t>(f)]) {
      CHECK(row > 0.0);
    } else {
      CHECK(row == 0.0);  // exactly zero, not merely small
    }
  }
}

TEST_CASE("masked-prediction loss gradient passes finite differences") {
  const int64_t k = 6, dim = 4, frames = 8;
  Rng rng(11);
  Tensor h({frames, dim});
  Tensor hw({dim, k});
  for (int64_t i = 0; i < h.NumElements(); ++i) h[i] = rng.Gaussian();
  for (int64_t i = 0; i < hw.NumElements(); ++i) hw[i] = rng.Gaussian();
  std::vector<int32_t> targets;
  for (int64_t i = 0; i < frames; ++i)
    targets.push_back(static_cast<int32_t>(rng.UniformInt(0, k - 1)));
  MaskInfo info;
  info.span_start = 1;
  info.span_len = 4;
  info.flags.assign(frames, false);
  for (int64_t i = 1; i < 5; ++i) info.flags[i] = true;
  auto f = [&](Tape& t, Var x) {
    return *BestRqLoss(t.Leaf(h, false), targets, info, x,
                       t.Leaf(Tensor({k}), false));
  };
  CHECK(GradCheck(f, hw, 1e-5) <= 1e-6);
}

ModelConfig PipelineConfig() {
  ModelConfig cfg;
  cfg.feature_dim = 4;
  cfg.stack = 2;
  cfg.stride = 2;
  cfg.causal_layers = 1;
  cfg.noncausal_layers = 1;
  cfg.model_dim = 8;
  cfg.heads = 2;
  cfg.conv_kernel = 3;
  cfg.right_context_frames = 2;
  cfg.ffn_dim = 12;
  cfg.text_embed_dim = 6;
  cfg.text_upsample = 2;
  cfg.vocab_size = 16;
  cfg.decoder_dim = 6;
  cfg.joint_dim = 6;
  cfg.quantizer_codebook = 8;
  cfg.quantizer_dim = 4;
  return cfg;
}

TEST_CASE("joist losses are a finite causal/non-causal pair") {
  ModelConfig cfg = PipelineConfig();
  ParamStore params = InitModelParams(cfg, 31);
  std::vector<WordSeq> texts = {{"bako", "lemo"}, {"lemo", "tiko"}};
  WordpieceModel wpm = WordpieceModel::Build(texts, cfg.vocab_size);
  std::vector<std::string> words = {"bako", "lemo", "tiko"};
  G2p g2p(words);

  Tape tape;
  ParamVars pv(&tape, &params, false);
  Rng mask_rng(17);
  CascadeLosses l =
      JoistLosses(pv, cfg, wpm, g2p, {"bako", "tiko"}, mask_rng);
  CHECK(std::isfinite(tape.Value(l.causal)[0]));
  CHECK(std::isfinite(tape.Value(l.noncausal)[0]));

  // Same mask seed, fresh tape: bit-identical loss values.
  Tape tape2;
  ParamVars pv2(&tape2, &params, false);
  Rng mask_rng2(17);
  CascadeLosses l2 =
      JoistLosses(pv2, cfg, wpm, g2p, {"bako", "tiko"}, mask_rng2);
  CHECK(tape.Value(l.causal)[0] == tape2.Value(l2.causal)[0]);
  CHECK(tape.Value(l.noncausal)[0] == tape2.Value(l2.noncausal)[0]);
}

TEST_CASE("joist end-to-end gradient survives finite differences") {
  ModelConfig cfg = PipelineConfig();
  ParamStore params = InitModelParams(cfg, 37);
  std::vector<WordSeq> texts = {{"bako", "lemo"}};
  WordpieceModel wpm = WordpieceModel::Build(texts, cfg.vocab_size);
  G2p g2p(std::vector<std::string>{"bako", "lemo"});
  for (const std::string name :
       {"frontend.text.embed", "frontend.text.proj.w", "enc.in_proj.w",
        "dec.c.joint.label.w"}) {
    auto f = [&](Tape& t, Var x) {
      ParamVars pv(&t, &params, false);
      pv.Override(name, x);
      Rng mask_rng(4);
      return JoistLosses(pv, cfg, wpm, g2p, {"bako", "lemo"}, mask_rng)
          .causal;
    };
    CAPTURE(name);
    CHECK(GradCheck(f, params.Get(name), 1e-5) <= 1e-4);
  }
}

TEST_CASE("bestrq pipeline skips utterances too short to mask") {
  ModelConfig cfg = PipelineConfig();
  ParamStore params = InitModelParams(cfg, 41);
  Quantizer q = InitQuantizer(2, cfg.StackedDim(), cfg.quantizer_dim,
                              cfg.quantizer_codebook);
  FeatureSequence tiny{Tensor({4, cfg.feature_dim}), 10.0};  // T' = 2
  Tape tape;
  ParamVars pv(&tape, &params, false);
  Rng rng(1);
  CHECK(!BestRqLosses(pv, cfg, q, tiny, rng).has_value());

  Rng rng2(1);
  FeatureSequence ok{Tensor({40, cfg.feature_dim}), 10.0};
  Rng fill(9);
  for (int64_t i = 0; i < ok.frames.NumElements(); ++i)
    ok.frames[i] = fill.Gaussian();
  auto out = BestRqLosses(pv, cfg, q, ok, rng2);
  REQUIRE(out.has_value());
  CHECK(std::isfinite(tape.Value(out->loss)[0]));
}

TEST_SUITE_END();

}  // namespace
}  // namespace cascade
