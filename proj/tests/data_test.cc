// tests/data_test.cc

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
#include <set>
#include <string>

#include "cascade/corpus.h"
#include "cascade/g2p.h"
#include "cascade/tts.h"
#include "cascade/wordpiece.h"
#include "doctest.h"

namespace cascade {
namespace {

TEST_SUITE_BEGIN("data");

TEST_CASE("wordpiece merge of repeated pair") {
  // One merge slot beyond reserved + {a}: the pair (a, a) wins.
  std::vector<WordSeq> texts = {{"aa", "aa"}};
  WordpieceModel m = WordpieceModel::Build(texts, 5);
  REQUIRE(m.VocabSize() == 5);
  CHECK(m.NumMerges() == 1);
  CHECK(m.Surface(4) == "aa");
  CHECK(m.EncodeWord("aa") == std::vector<int32_t>{4});
}

TEST_CASE("wordpiece pure character model at minimum vocab") {
  std::vector<WordSeq> texts = {{"abc", "cab"}};
  WordpieceModel m = WordpieceModel::Build(texts, 3 + 3);
  CHECK(m.NumMerges() == 0);
  CHECK(m.EncodeWord("abc").size() == 3);
  CHECK_THROWS_AS(WordpieceModel::Build(texts, 5), UsageError);
}

TEST_CASE("wordpiece encode/decode round trip") {
  std::vector<WordSeq> texts = {
      {"bako", "lemito", "bako"}, {"lemito", "ba", "kolo"}, {"tiko"}};
  WordpieceModel m = WordpieceModel::Build(texts, 16);
  for (const WordSeq& sent : texts) {
    for (const std::string& w : sent) {
      auto ids = m.EncodeWord(w);
      // No reserved ids on clean text.
      for (int32_t id : ids) CHECK(id >= 3);
      CHECK(m.DecodeToChars(ids) == w);
      // Re-encoding each decoded piece surface reproduces the same ids.
      std::vector<int32_t> again;
      for (int32_t id : ids) {
        auto sub = m.EncodeWord(m.Surface(id));
        again.insert(again.end(), sub.begin(), sub.end());
      }
      CHECK(again == ids);
    }
  }
  // Characters outside the inventory become unk, never blank or mask.
  auto dirty = m.EncodeWord("b9k");
  CHECK(std::count(dirty.begin(), dirty.end(), WordpieceModel::kUnkId) == 1);
  CHECK(std::count(dirty.begin(), dirty.end(), WordpieceModel::kBlankId) == 0);
}

TEST_CASE("wordpiece tie break is lexicographic") {
  // Pairs (a,b) and (b,a) both occur twice in "abab"; (a,b) sorts first.
  std::vector<WordSeq> texts = {{"abab"}};
  WordpieceModel m = WordpieceModel::Build(texts, 6);
  CHECK(m.Surface(5) == "ab");
}

TEST_CASE("wordpiece save/load round trip") {
  std::vector<WordSeq> texts = {{"bako", "lemito", "kolo", "bako"}};
  WordpieceModel m = WordpieceModel::Build(texts, 12);
  const std::string path = "/tmp/cascade_wpm_test.txt";
  m.Save(path);
  WordpieceModel m2 = WordpieceModel::Load(path);
  REQUIRE(m2.VocabSize() == m.VocabSize());
  for (const std::string w : {"bako", "lemito", "kolo", "zq"})
    CHECK(m2.EncodeWord(w) == m.EncodeWord(w));
  std::remove(path.c_str());
}

TEST_CASE("g2p table entries, fallback, and empty input") {
  std::vector<std::string> table = {"bako", "zzpilo"};
  G2p g2p(table);
  // Table word phonemizes by greedy digraph chunking: BA KO.
  PhonemeSequence ph = g2p.Phonemize({"bako"});
  REQUIRE(ph.Size() == 2);
  CHECK(G2p::PhonemeName(ph.ids[0]) == "BA");
  CHECK(G2p::PhonemeName(ph.ids[1]) == "KO");
  // OOV falls back to one phoneme per character.
  PhonemeSequence zq = g2p.Phonemize({"zq"});
  REQUIRE(zq.Size() == 2);
  CHECK(G2p::PhonemeName(zq.ids[0]) == "Z");
  CHECK(G2p::PhonemeName(zq.ids[1]) == "Q");
  CHECK(g2p.Phonemize({}).Size() == 0);
}

TEST_CASE("tts oracle determinism and template lengths") {
  std::vector<std::string> vocab = {"bako", "lemito"};
  TtsOracle oracle(vocab, 8, /*voice_seed=*/11, /*seed=*/22, 0.05);
  FeatureSequence a = oracle.Synthesize({"bako", "lemito"});
  FeatureSequence b = oracle.Synthesize({"bako", "lemito"});
  CHECK(a.frames.data() == b.frames.data());  // bit-identical
  CHECK(a.NumFrames() ==
        oracle.TemplateFrames("bako") + oracle.TemplateFrames("lemito"));
  for (const auto& w : vocab) {
    CHECK(oracle.TemplateFrames(w) >= 6);
    CHECK(oracle.TemplateFrames(w) <= 12);
  }
  CHECK(oracle.Synthesize({}).NumFrames() == 0);
  CHECK_THROWS_AS(oracle.Synthesize({"unknownword"}), UsageError);
  // Distinct jitter seed, same voice: different features, same lengths.
  TtsOracle other(vocab, 8, 11, /*seed=*/33, 0.05);
  FeatureSequence c = other.Synthesize({"bako", "lemito"});
  CHECK(c.NumFrames() == a.NumFrames());
  CHECK(c.frames.data() != a.frames.data());
}

CorpusConfig SmallConfig() {
  CorpusConfig cfg;
  cfg.supervised_size = 600;
  cfg.audio_only_size = 80;
  cfg.text_only_size = 2500;
  cfg.held_out_size = 100;
  cfg.core_words = 60;
  cfg.breadth_words = 120;
  cfg.rare_stratum_count = 20;
  cfg.marker_word_count = 8;
  cfg.clm_word_count = 8;
  cfg.feature_dim = 4;
  cfg.special_occurrences = 40;
  return cfg;
}

TEST_CASE("synth_corpora cardinalities and determinism") {
  CorpusConfig cfg = SmallConfig();
  SynthOutput a = SynthCorpora(cfg, 7);
  CHECK(a.supervised.size() == 600);
  CHECK(a.audio_only.size() == 80);
  CHECK(a.text_only.size() == 2500);
  CHECK(a.held_out.size() == 100);

  SynthOutput b = SynthCorpora(cfg, 7);
  REQUIRE(a.supervised.size() == b.supervised.size());
  for (size_t i = 0; i < a.supervised.size(); ++i) {
    CHECK(a.supervised[i].id == b.supervised[i].id);
    CHECK(a.supervised[i].words == b.supervised[i].words);
    CHECK(a.supervised[i].audio.frames.data() ==
          b.supervised[i].audio.frames.data());
  }
  // A different seed changes content.
  SynthOutput c = SynthCorpora(cfg, 8);
  bool any_diff = false;
  for (size_t i = 0; i < a.supervised.size() && !any_diff; ++i)
    any_diff = a.supervised[i].words != c.supervised[i].words;
  CHECK(any_diff);

  CHECK_THROWS_AS(
      [&] {
        CorpusConfig bad = cfg;
        bad.supervised_size = bad.max_corpus_size + 1;
        SynthCorpora(bad, 7);
      }(),
      UsageError);
}

TEST_CASE("rare stratum has exactly the configured number of rare types") {
  CorpusConfig cfg = SmallConfig();
  SynthOutput out = SynthCorpora(cfg, 21);
  // Independent frequency pass over generated S.
  std::map<std::string, int64_t> counts;
  for (const auto& ex : out.supervised)
    for (const auto& w : ex.words) ++counts[w];
  int64_t rare_types = 0;
  for (const auto& [w, n] : counts)
    if (n < 5) ++rare_types;
  CHECK(rare_types == cfg.rare_stratum_count);
}

TEST_CASE("partition assignment follows the frequency criteria") {
  // Hand-built corpora: unigram "kuzo" has count(S) = 2, count(U^T) = 200.
  std::vector<SupervisedExample> s;
  FeatureSequence dummy{Tensor({2, 2}), 10.0};
  for (int i = 0; i < 40; ++i)
    s.push_back({dummy, {"golo", "golo", "golo"}, "s-" + std::to_string(i)});
  s.push_back({dummy, {"kuzo", "golo"}, "s-a"});
  s.push_back({dummy, {"kuzo", "golo"}, "s-b"});
  std::vector<UnsupervisedText> ut;
  for (int i = 0; i < 200; ++i)
    ut.push_back({{"kuzo", "golo"}, "ut-" + std::to_string(i)});

  std::vector<SupervisedExample> held = {
      {dummy, {"golo", "kuzo"}, "t-clm"},   // rare in S, common in U^T
      {dummy, {"golo", "golo"}, "t-vs"},    // every unigram common in S
      {dummy, {"zzmao", "golo"}, "t-rpn"},  // marker absent from S
      {dummy, {"golo", "ralo"}, "t-rlm"},   // rare in both
  };
  PartitionThresholds th;
  th.rare = 5;
  th.common = 150;
  TestPartitions parts = PartitionTestSets(s, ut, held, th, 99);
  REQUIRE(parts.c_lm.size() == 1);
  CHECK(parts.c_lm[0].id == "t-clm");
  REQUIRE(parts.vs.size() == 1);
  CHECK(parts.vs[0].id == "t-vs");
  REQUIRE(parts.rpn.size() == 1);
  CHECK(parts.rpn[0].id == "t-rpn");
  REQUIRE(parts.r_lm.size() == 1);
  CHECK(parts.r_lm[0].id == "t-rlm");
  // Noisy mirrors VS with fresh ids and modified features.
  REQUIRE(parts.noisy.size() == 1);
  CHECK(parts.noisy[0].id == "t-vs-noisy");
  CHECK(parts.noisy[0].audio.frames.data() != dummy.frames.data());

  CHECK_THROWS_AS(PartitionTestSets(s, ut, {}, th, 99), UsageError);
}

TEST_CASE("partition sizes match an independent brute-force scan") {
  CorpusConfig cfg = SmallConfig();
  SynthOutput out = SynthCorpora(cfg, 5);
  PartitionThresholds th;  // desk defaults: rare 5, common 30
  TestPartitions parts =
      PartitionTestSets(out.supervised, out.text_only, out.held_out, th, 1);

  // Independent scan written against the criteria directly.
  std::map<std::string, int64_t> cs, ct;
  for (const auto& ex : out.supervised)
    for (const auto& w : ex.words) ++cs[w];
  for (const auto& ex : out.text_only)
    for (const auto& w : ex.words) ++ct[w];
  int64_t n_rpn = 0, n_rlm = 0, n_clm = 0, n_vs = 0;
  for (const auto& ex : out.held_out) {
    bool rpn = false, rlm = false, clm = false;
    for (const auto& w : ex.words) {
      int64_t a = cs.count(w) ? cs[w] : 0;
      int64_t b = ct.count(w) ? ct[w] : 0;
      if (a < th.rare && w.rfind("zz", 0) == 0) rpn = true;
      if (a < th.rare && b < th.rare) rlm = true;
      if (a < th.rare && b >= th.common) clm = true;
    }
    if (rpn)
      ++n_rpn;
    else if (rlm)
      ++n_rlm;
    else if (clm)
      ++n_clm;
    else
      ++n_vs;
  }
  CHECK(static_cast<int64_t>(parts.rpn.size()) == n_rpn);
  CHECK(static_cast<int64_t>(parts.r_lm.size()) == n_rlm);
  CHECK(static_cast<int64_t>(parts.c_lm.size()) == n_clm);
  CHECK(static_cast<int64_t>(parts.vs.size()) == n_vs);
  // The engineered strata are all represented.
  CHECK(parts.rpn.size() >= 10);
  CHECK(parts.r_lm.size() >= 10);
  CHECK(parts.c_lm.size() >= 10);
  CHECK(parts.vs.size() >= 20);
  // Every C_LM qualifying unigram satisfies both inequalities on recount.
  for (const auto& ex : parts.c_lm) {
    bool found = false;
    for (const auto& w : ex.words) {
      int64_t a = cs.count(w) ? cs[w] : 0;
      int64_t b = ct.count(w) ? ct[w] : 0;
      if (a < th.rare && b >= th.common) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("corpus files round trip bit-exactly") {
  CorpusConfig cfg = SmallConfig();
  cfg.supervised_size = 600;
  SynthOutput out = SynthCorpora(cfg, 3);
  auto records = ToRecords(out.supervised);
  WriteCorpusFiles("/tmp/cascade_s.manifest", "/tmp/cascade_s.feats", records);
  auto loaded = ReadCorpusFiles("/tmp/cascade_s.manifest",
                                "/tmp/cascade_s.feats", cfg.feature_dim,
                                cfg.frame_step_ms);
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].id == records[i].id);
    CHECK(loaded[i].words == records[i].words);
    REQUIRE(loaded[i].audio.frames.NumElements() ==
            records[i].audio.frames.NumElements());
    // Values survive the float32 container exactly.
    for (int64_t j = 0; j < loaded[i].audio.frames.NumElements(); ++j)
      CHECK(static_cast<float>(loaded[i].audio.frames[j]) ==
            static_cast<float>(records[i].audio.frames[j]));
  }
  std::remove("/tmp/cascade_s.manifest");
  std::remove("/tmp/cascade_s.feats");
}

TEST_CASE("character stream resegments into words") {
  CHECK(SplitCharsIntoWords("bagotemo") == WordSeq{"bago", "temo"});
  CHECK(SplitCharsIntoWords("") == WordSeq{});
  CHECK(SplitCharsIntoWords("bag") == WordSeq{"bag"});
  CHECK(IsMarkerWord("zzbano"));
  CHECK(!IsMarkerWord("bano"));
}

TEST_SUITE_END();

}  // namespace
}  // namespace cascade
