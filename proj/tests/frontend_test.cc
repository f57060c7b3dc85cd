// tests/frontend_test.cc

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

#include <cstring>

#include "cascade/frontend.h"
#include "cascade/rng.h"
#include "doctest.h"

namespace cascade {
namespace {

FeatureSequence RandomFeatures(int64_t t, int64_t d, uint64_t seed,
                               double step_ms = 10.0) {
  Rng rng(seed);
  FeatureSequence f;
  f.frame_step_ms = step_ms;
  f.frames = Tensor({t, d});
  for (int64_t i = 0; i < f.frames.NumElements(); ++i)
    f.frames[i] = rng.Gaussian();
  return f;
}

TEST_SUITE_BEGIN("frontend");

TEST_CASE("stacking with production constants") {
  FeatureSequence f = RandomFeatures(90, 128, 1);
  StackedFeatures sf = StackAndSubsample(f, 4, 3);
  CHECK(sf.Dim() == 512);
  CHECK(sf.covered_ms == doctest::Approx(30.0));
  CHECK(sf.NumFrames() == 30);
  // 900ms of right context at 30ms per stacked frame is exactly 30 frames.
  CHECK(static_cast<int64_t>(900.0 / sf.covered_ms) == 30);
}

TEST_CASE("stacking length is ceil(T/stride) for all small T") {
  for (int64_t t = 1; t <= 10000; t += (t < 64 ? 1 : 97)) {
    FeatureSequence f;
    f.frames = Tensor({t, 1});
    StackedFeatures sf = StackAndSubsample(f, 4, 3);
    CHECK(sf.NumFrames() == (t + 2) / 3);
  }
  FeatureSequence empty;
  empty.frames = Tensor({0, 4});
  CHECK_THROWS_AS(StackAndSubsample(empty, 4, 3), UsageError);
}

TEST_CASE("stacking zero-pads sequence edges") {
  // T=1, stack=4: window [-2, 1] holds one valid frame at position 0,
  // which lands in slot 2; the other three slots stay zero.
  FeatureSequence f;
  f.frames = Tensor({1, 2}, {5.0, 6.0});
  StackedFeatures sf = StackAndSubsample(f, 4, 3);
  REQUIRE(sf.NumFrames() == 1);
  REQUIRE(sf.Dim() == 8);
  std::vector<double> expect = {0, 0, 0, 0, 5, 6, 0, 0};
  CHECK(sf.frames.data() == expect);
}

TEST_CASE("audio span mask length and determinism") {
  {
    Rng rng(3);
    StackedFeatures sf{Tensor({100, 4}), 30.0};
    auto ma = AudioMaskSpan(sf, 0.15, rng);
    REQUIRE(ma.has_value());
    CHECK(ma->info.span_len == 15);
  }
  {
    Rng rng(3);
    StackedFeatures sf{Tensor({7, 4}), 30.0};
    auto ma = AudioMaskSpan(sf, 0.15, rng);
    REQUIRE(ma.has_value());
    CHECK(ma->info.span_len == 1);  // floor(0.15 * 7)
  }
  {
    // Too short to host a span: skip signal.
    Rng rng(3);
    StackedFeatures sf{Tensor({6, 4}), 30.0};
    CHECK(!AudioMaskSpan(sf, 0.15, rng).has_value());
  }
  {
    Rng r1(17), r2(17);
    FeatureSequence f = RandomFeatures(60, 4, 9);
    StackedFeatures sf = StackAndSubsample(f, 4, 3);
    auto a = AudioMaskSpan(sf, 0.15, r1);
    auto b = AudioMaskSpan(sf, 0.15, r2);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->info.span_start == b->info.span_start);
    CHECK(a->masked.frames.data() == b->masked.frames.data());
  }
}

TEST_CASE("audio span mask leaves unmasked frames bitwise unchanged") {
  Rng rng(5);
  FeatureSequence f = RandomFeatures(75, 6, 23);
  StackedFeatures sf = StackAndSubsample(f, 4, 3);
  auto ma = AudioMaskSpan(sf, 0.15, rng);
  REQUIRE(ma.has_value());
  const int64_t d = sf.Dim();
  int64_t masked_rows = 0;
  for (int64_t t = 0; t < sf.NumFrames(); ++t) {
    if (ma->info.flags[t]) {
      ++masked_rows;
      continue;
    }
    CHECK(std::memcmp(&sf.frames.data()[t * d],
                      &ma->masked.frames.data()[t * d],
                      sizeof(double) * d) == 0);
  }
  CHECK(masked_rows == ma->info.span_len);
  // Flags are true exactly on the span.
  for (int64_t t = 0; t < sf.NumFrames(); ++t)
    CHECK(ma->info.flags[t] == (t >= ma->info.span_start &&
                                t < ma->info.span_start + ma->info.span_len));
}

TEST_CASE("phoneme mask hits the exact floor count") {
  PhonemeSequence ph;
  for (int i = 0; i < 20; ++i) ph.ids.push_back(i % 7);
  ph.masked.assign(20, false);
  {
    Rng rng(31);
    PhonemeSequence out = PhonemeMask(ph, 0.25, 99, rng);
    int64_t n = 0;
    for (size_t i = 0; i < out.ids.size(); ++i) {
      if (out.masked[i]) {
        ++n;
        CHECK(out.ids[i] == 99);
      } else {
        CHECK(out.ids[i] == ph.ids[i]);
      }
    }
    CHECK(n == 5);
  }
  {
    Rng rng(31);
    PhonemeSequence out = PhonemeMask(ph, 0.0, 99, rng);
    CHECK(out.ids == ph.ids);
  }
  {
    Rng r1(8), r2(8);
    PhonemeSequence a = PhonemeMask(ph, 0.3, 99, r1);
    PhonemeSequence b = PhonemeMask(ph, 0.3, 99, r2);
    CHECK(a.ids == b.ids);
  }
}

TEST_CASE("text frontend length and repetition structure") {
  Rng rng(2);
  Tensor embed({10, 6});
  Tensor proj({6, 8});
  Tensor bias({8});
  for (int64_t i = 0; i < embed.NumElements(); ++i) embed[i] = rng.Gaussian();
  for (int64_t i = 0; i < proj.NumElements(); ++i) proj[i] = rng.Gaussian();
  PhonemeSequence ph;
  ph.ids = {1, 4, 2, 9, 0};
  ph.masked.assign(5, false);

  Tape t;
  Var e = t.Leaf(embed, false);
  Var p = t.Leaf(proj, false);
  Var b = t.Leaf(bias, false);
  Var out3 = TextFrontend(ph, e, p, b, 3);
  CHECK(t.Value(out3).Rows() == 15);
  CHECK(t.Value(out3).Cols() == 8);
  // Rows within each repetition group are bit-identical.
  const Tensor& v = t.Value(out3);
  for (int64_t g = 0; g < 5; ++g)
    for (int64_t j = 1; j < 3; ++j)
      CHECK(std::memcmp(&v.data()[(g * 3) * 8], &v.data()[(g * 3 + j) * 8],
                        8 * sizeof(double)) == 0);

  Var out1 = TextFrontend(ph, e, p, b, 1);
  CHECK(t.Value(out1).Rows() == 5);
  // Upsample 1 equals the projected embeddings directly.
  for (int64_t g = 0; g < 5; ++g)
    CHECK(std::memcmp(&t.Value(out1).data()[g * 8], &v.data()[(g * 3) * 8],
                      8 * sizeof(double)) == 0);

  PhonemeSequence bad;
  bad.ids = {42};
  bad.masked = {false};
  CHECK_THROWS_AS(TextFrontend(bad, e, p, b, 2), UsageError);
}

TEST_SUITE_END();

}  // namespace
}  // namespace cascade
