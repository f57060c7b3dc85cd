// tests/eval_test.cc

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

#include <cstdio>
#include <map>

#include "cascade/eval.h"
#include "cascade/rng.h"
#include "doctest.h"

namespace cascade {
namespace {

// Independent oracle: plain recursive edit distance with memoization,
// written without the rolling-array trick used by the implementation.
int64_t NaiveEditDistance(const WordSeq& a, const WordSeq& b) {
  std::map<std::pair<size_t, size_t>, int64_t> memo;
  struct Rec {
    const WordSeq *a, *b;
    std::map<std::pair<size_t, size_t>, int64_t>* memo;
    int64_t Go(size_t i, size_t j) const {
      if (i == a->size()) return static_cast<int64_t>(b->size() - j);
      if (j == b->size()) return static_cast<int64_t>(a->size() - i);
      auto key = std::make_pair(i, j);
      auto it = memo->find(key);
      if (it != memo->end()) return it->second;
      int64_t best = Go(i + 1, j + 1) + ((*a)[i] == (*b)[j] ? 0 : 1);
      best = std::min(best, Go(i, j + 1) + 1);
      best = std::min(best, Go(i + 1, j) + 1);
      (*memo)[key] = best;
      return best;
    }
  };
  return Rec{&a, &b, &memo}.Go(0, 0);
}

WordSeq RandomWords(Rng& rng, int64_t len) {
  static const std::vector<std::string> kPool = {"bago", "temo", "kilo",
                                                 "rap", "suno", "velo"};
  WordSeq out;
  for (int64_t i = 0; i < len; ++i)
    out.push_back(kPool[static_cast<size_t>(
        rng.UniformInt(0, static_cast<int64_t>(kPool.size()) - 1))]);
  return out;
}

TEST_SUITE_BEGIN("eval");

TEST_CASE("wer basics") {
  CHECK(Wer({{"a", "b", "c"}}, {{"a", "b", "c"}}) == 0.0);
  CHECK(Wer({{"a", "b", "c"}}, {{"a", "x", "c"}}) ==
        doctest::Approx(1.0 / 3.0));
  // Insertions and deletions count too.
  CHECK(Wer({{"a", "b"}}, {{"a", "b", "c"}}) == doctest::Approx(0.5));
  CHECK(Wer({{"a", "b"}}, {{"a"}}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Wer({}, {}), UsageError);
  CHECK_THROWS_AS(Wer({{"a"}}, {}), UsageError);
}

TEST_CASE("wer equals the independent edit-distance oracle") {
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    WordSeq ref = RandomWords(rng, 1 + rng.UniformInt(0, 7));
    WordSeq hyp = RandomWords(rng, rng.UniformInt(0, 8));
    CHECK(EditDistance(ref, hyp) == NaiveEditDistance(ref, hyp));
  }
}

TEST_CASE("lattice density is arcs over reference wordpieces") {
  Lattice lattice;
  lattice.num_nodes = 7;
  for (int i = 0; i < 6; ++i)
    lattice.arcs.push_back({i, i + 1, 3, -0.1});
  CHECK(LatticeDensity(lattice, 3) == 2.0);
  // A chain of k arcs against k reference pieces is exactly 1.
  CHECK(LatticeDensity(lattice, 6) == 1.0);
  CHECK_THROWS_AS(LatticeDensity(lattice, 0), UsageError);
}

TEST_CASE("average decoding states reports both normalizations") {
  std::vector<DecodeStats> one = {{10, 4, 1}};
  StatsSummary s = AvgDecodingStates(one);
  CHECK(s.per_utterance_mean == 10.0);
  CHECK(s.per_frame_mean == doctest::Approx(10.0 / 4.0));
  std::vector<DecodeStats> two = {{10, 5, 1}, {20, 5, 1}};
  CHECK(AvgDecodingStates(two).per_utterance_mean == 15.0);
  CHECK_THROWS_AS(AvgDecodingStates({}), UsageError);
}

TEST_CASE("delta formatting follows the signed-percent style") {
  CHECK(FormatDeltaPercent(0.0) == "-0.0%");
  CHECK(FormatDeltaPercent(-0.047) == "-4.7%");
  CHECK(FormatDeltaPercent(0.125) == "+12.5%");
  CHECK(RelativeDelta(6.0, 8.0) == doctest::Approx(-0.25));
  CHECK(RelativeDelta(0.0, 0.0) == 0.0);
}

TEST_CASE("report table carries the five partitions and self-deltas") {
  EvalReport report;
  for (const char* name : {"vs", "noisy", "rpn", "r_lm", "c_lm"}) {
    EvalRow row;
    row.set_name = name;
    row.wer = 0.25;
    row.lattice_density = 2.0;
    row.avg_states_utt = 40.0;
    row.avg_states_frame = 4.0;
    row.utterances = 10;
    report.rows.push_back(row);
  }
  std::string table = RenderTable(report, &report);
  for (const char* name : {"vs", "noisy", "rpn", "r_lm", "c_lm"})
    CHECK(table.find(name) != std::string::npos);
  // Against itself every rendered delta is -0.0%.
  CHECK(table.find("+") == std::string::npos);
  size_t count = 0;
  for (size_t p = table.find("-0.0%"); p != std::string::npos;
       p = table.find("-0.0%", p + 1))
    ++count;
  CHECK(count == 15);  // 5 sets x 3 delta columns

  const std::string path = "/tmp/cascade_report_test.csv";
  WriteReportCsv(report, path);
  EvalReport loaded = ReadReportCsv(path);
  REQUIRE(loaded.rows.size() == 5);
  CHECK(loaded.Row("rpn").wer == 0.25);
  CHECK(loaded.Row("c_lm").utterances == 10);
  std::remove(path.c_str());
}

TEST_SUITE_END();

}  // namespace
}  // namespace cascade
