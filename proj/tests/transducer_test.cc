// tests/transducer_test.cc

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

#include "cascade/rng.h"
#include "cascade/transducer.h"
#include "doctest.h"

namespace cascade {
namespace {

ModelConfig TinyConfig(int64_t vocab = 6) {
  ModelConfig cfg;
  cfg.feature_dim = 4;
  cfg.stack = 1;
  cfg.stride = 1;
  cfg.causal_layers = 1;
  cfg.noncausal_layers = 1;
  cfg.model_dim = 8;
  cfg.heads = 2;
  cfg.conv_kernel = 3;
  cfg.ffn_dim = 10;
  cfg.vocab_size = vocab;
  cfg.decoder_dim = 6;
  cfg.joint_dim = 6;
  cfg.quantizer_codebook = 4;
  cfg.quantizer_dim = 3;
  return cfg;
}

Tensor RandomEnc(int64_t t, int64_t d, uint64_t seed) {
  Rng rng(seed);
  Tensor x({t, d});
  for (int64_t i = 0; i < x.NumElements(); ++i) x[i] = rng.Gaussian();
  return x;
}

TEST_SUITE_BEGIN("transducer");

TEST_CASE("prediction states depend only on the label prefix") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 3);
  Tape tape;
  ParamVars pv(&tape, &params, false);
  std::vector<int32_t> a = {2, 3, 4};
  std::vector<int32_t> b = {2, 3, 5};  // shares a 2-label prefix
  Tensor sa = tape.Value(PredictionStatesVar(pv, "dec.c.", a));
  Tensor sb = tape.Value(PredictionStatesVar(pv, "dec.c.", b));
  REQUIRE(sa.Rows() == 4);
  REQUIRE(sb.Rows() == 4);
  for (int64_t u = 0; u <= 2; ++u)  // first k+1 states identical
    for (int64_t c = 0; c < cfg.decoder_dim; ++c)
      CHECK(sa.At(u, c) == sb.At(u, c));
  double diff = 0.0;
  for (int64_t c = 0; c < cfg.decoder_dim; ++c)
    diff += std::abs(sa.At(3, c) - sb.At(3, c));
  CHECK(diff > 0.0);

  // Empty prefix: start state only.
  Tensor s0 = tape.Value(PredictionStatesVar(pv, "dec.c.", {}));
  CHECK(s0.Rows() == 1);
  CHECK(s0.data() == params.Get("dec.c.rnn.h0").data());

  std::vector<int32_t> with_blank = {2, 0, 3};
  CHECK_THROWS_AS(PredictionStatesVar(pv, "dec.c.", with_blank), UsageError);
}

TEST_CASE("inference scorer matches the tape-side prediction network") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 4);
  HatScorer scorer(params, "dec.c.");
  Tape tape;
  ParamVars pv(&tape, &params, false);
  std::vector<int32_t> labels = {1, 4, 2};
  Tensor tape_states = tape.Value(PredictionStatesVar(pv, "dec.c.", labels));
  std::vector<double> s = scorer.StartState();
  for (size_t u = 0; u <= labels.size(); ++u) {
    for (int64_t c = 0; c < cfg.decoder_dim; ++c)
      CHECK(s[static_cast<size_t>(c)] ==
            doctest::Approx(tape_states.At(static_cast<int64_t>(u), c))
                .epsilon(1e-12));
    if (u < labels.size()) s = scorer.NextState(s, labels[u]);
  }
}

TEST_CASE("hat joint is a proper distribution") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 9);
  HatScorer scorer(params, "dec.nc.");
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> enc(static_cast<size_t>(cfg.model_dim));
    for (auto& v : enc) v = rng.Gaussian();
    std::vector<double> state = scorer.StartState();
    HatDistribution d = scorer.Distribution(enc, state);
    double sum = d.p_blank;
    for (double p : d.p_labels) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("hat joint analytic cases via hand-set heads") {
  ModelConfig cfg = TinyConfig(/*vocab=*/5);  // 4 non-blank labels
  ParamStore params = InitModelParams(cfg, 10);
  // Zero heads: blank logit 0 and uniform label logits.
  for (const char* name : {"dec.c.joint.blank.w", "dec.c.joint.blank.b",
                           "dec.c.joint.label.w", "dec.c.joint.label.b"}) {
    Tensor& t = params.GetMutable(name);
    for (int64_t i = 0; i < t.NumElements(); ++i) t[i] = 0.0;
  }
  HatScorer scorer(params, "dec.c.");
  std::vector<double> enc(static_cast<size_t>(cfg.model_dim), 0.3);
  HatDistribution d = scorer.Distribution(enc, scorer.StartState());
  CHECK(d.p_blank == doctest::Approx(0.5).epsilon(1e-15));
  for (double p : d.p_labels)
    CHECK(p == doctest::Approx(0.5 / 4.0).epsilon(1e-12));
  // Saturated blank head.
  params.GetMutable("dec.c.joint.blank.b")[0] = 200.0;
  HatScorer sat(params, "dec.c.");
  CHECK(sat.Distribution(enc, sat.StartState()).p_blank ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-path loss is the final blank log-probability") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 11);
  Tensor enc = RandomEnc(1, cfg.model_dim, 2);
  HatScorer scorer(params, "dec.c.");
  std::vector<double> row(enc.data());
  const double expected = -scorer.Score(row, scorer.StartState()).log_blank;
  CHECK(TransducerLossValue(params, "dec.c.", enc, {}, 4) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(BruteForceLoss(params, "dec.c.", enc, {}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("two-alignment instance matches the hand-computed sum") {
  // T'=2, U=1: the label is emitted either at frame 0 or frame 1.
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 12);
  Tensor enc = RandomEnc(2, cfg.model_dim, 3);
  HatScorer scorer(params, "dec.c.");
  const int32_t y = 3;
  std::vector<double> e0(enc.data().begin(), enc.data().begin() + cfg.model_dim);
  std::vector<double> e1(enc.data().begin() + cfg.model_dim, enc.data().end());
  std::vector<double> s0 = scorer.StartState();
  std::vector<double> s1 = scorer.NextState(s0, y);
  auto p = [&](const std::vector<double>& e, const std::vector<double>& s) {
    return scorer.Distribution(e, s);
  };
  // Path A: emit at frame 0, then blank, blank.
  double path_a = p(e0, s0).p_labels[y - 1] * p(e0, s1).p_blank *
                  p(e1, s1).p_blank;
  // Path B: blank at frame 0, emit at frame 1, then blank.
  double path_b = p(e0, s0).p_blank * p(e1, s0).p_labels[y - 1] *
                  p(e1, s1).p_blank;
  const double expected = -std::log(path_a + path_b);
  std::vector<int32_t> targets = {y};
  CHECK(TransducerLossValue(params, "dec.c.", enc, targets, 4) ==
        doctest::Approx(expected).epsilon(1e-11));
  CHECK(BruteForceLoss(params, "dec.c.", enc, targets) ==
        doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("alignment path count follows the lattice structure") {
  CHECK(AlignmentPathCount(1, 0) == 1);
  CHECK(AlignmentPathCount(2, 1) == 2);
  CHECK(AlignmentPathCount(3, 2) == 6);  // C(T-1+U, U)
  CHECK(AlignmentPathCount(4, 3) == 20);
}

TEST_CASE("dynamic program agrees with brute-force enumeration") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t vocab = 4 + rng.UniformInt(0, 2);  // 3..5 non-blank labels
    ModelConfig cfg = TinyConfig(vocab);
    ParamStore params = InitModelParams(cfg, DeriveSeed(8, "dp", trial));
    const int64_t t = 1 + rng.UniformInt(0, 3);
    const int64_t u = rng.UniformInt(0, 3);
    Tensor enc = RandomEnc(t, cfg.model_dim, DeriveSeed(9, "enc", trial));
    std::vector<int32_t> targets;
    for (int64_t i = 0; i < u; ++i)
      targets.push_back(
          static_cast<int32_t>(rng.UniformInt(1, vocab - 1)));
    const std::string dec = (trial % 2) ? "dec.c." : "dec.nc.";
    const double dp = TransducerLossValue(params, dec, enc, targets, 8);
    const double oracle = BruteForceLoss(params, dec, enc, targets);
    CHECK(std::abs(dp - oracle) <= 1e-9);
  }
}

TEST_CASE("loss is sensitive to label order") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 21);
  Tensor enc = RandomEnc(4, cfg.model_dim, 5);
  std::vector<int32_t> ab = {2, 4};
  std::vector<int32_t> ba = {4, 2};
  CHECK(TransducerLossValue(params, "dec.c.", enc, ab, 4) !=
        TransducerLossValue(params, "dec.c.", enc, ba, 4));
}

TEST_CASE("symbol budget violations are usage errors") {
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 22);
  Tensor enc = RandomEnc(1, cfg.model_dim, 6);
  Tape tape;
  ParamVars pv(&tape, &params, false);
  std::vector<int32_t> too_long = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(
      TransducerLossVar(pv, "dec.c.", tape.Leaf(enc, false), too_long, 4),
      UsageError);
}

TEST_CASE("hat loss gradient passes the finite-difference check") {
  // Checks the gradient with respect to every decoder parameter array on a
  // tiny instance, treating the rest of the network as fixed.
  ModelConfig cfg = TinyConfig();
  ParamStore params = InitModelParams(cfg, 23);
  Tensor enc = RandomEnc(3, cfg.model_dim, 7);
  std::vector<int32_t> targets = {2, 4};
  const std::vector<std::string> names = {
      "dec.c.embed",         "dec.c.rnn.wx",        "dec.c.rnn.wr",
      "dec.c.rnn.b",         "dec.c.rnn.h0",        "dec.c.joint.we",
      "dec.c.joint.wg",      "dec.c.joint.b",       "dec.c.joint.blank.w",
      "dec.c.joint.blank.b", "dec.c.joint.label.w", "dec.c.joint.label.b"};
  for (const std::string& name : names) {
    auto f = [&](Tape& t, Var x) -> Var {
      ParamVars pv(&t, &params, false);
      pv.Override(name, x);
      return TransducerLossVar(pv, "dec.c.", t.Leaf(enc, false), targets, 8);
    };
    CAPTURE(name);
    CHECK(GradCheck(f, params.Get(name), 1e-5) <= 1e-4);
  }
  // Gradient with respect to the encoder frames themselves.
  auto fenc = [&](Tape& t, Var x) -> Var {
    ParamVars pv(&t, &params, false);
    return TransducerLossVar(pv, "dec.c.", x, targets, 8);
  };
  CHECK(GradCheck(fenc, enc, 1e-5) <= 1e-4);
}

TEST_SUITE_END();

}  // namespace
}  // namespace cascade
