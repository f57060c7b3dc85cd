// include/cascade/corpus.h

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

#ifndef CASCADE_CORPUS_H_
#define CASCADE_CORPUS_H_

#include <string>
#include <vector>

#include "cascade/frontend.h"
#include "cascade/wordpiece.h"

namespace cascade {

struct SupervisedExample {
  FeatureSequence audio;
  WordSeq words;
  std::string id;
};

struct UnsupervisedAudio {
  FeatureSequence audio;
  std::string id;
};

struct UnsupervisedText {
  WordSeq words;
  std::string id;
};

// Synthetic-language conventions: words are syllable strings ending in 'o',
// and 'o' appears only word-finally, so a character stream resegments into
// words unambiguously. Marker words (the proper-noun stand-ins) carry the
// reserved "zz" prefix.
bool IsMarkerWord(const std::string& word);
WordSeq SplitCharsIntoWords(const std::string& chars);
std::string JoinWords(const WordSeq& words);

struct CorpusConfig {
  int64_t supervised_size = 1000;   // |S|
  int64_t audio_only_size = 2000;   // |U^S|
  int64_t text_only_size = 5000;    // |U^T|
  int64_t held_out_size = 200;
  int64_t max_corpus_size = 1000000;

  // Vocabulary strata.
  int64_t core_words = 120;
  int64_t breadth_words = 300;      // text-only extra vocabulary
  int64_t rare_stratum_count = 20;  // count in S falls in [1, t_rare)
  int64_t marker_word_count = 12;   // absent from S, frequent in U^T
  int64_t clm_word_count = 15;      // absent from S, frequent in U^T
  int64_t syllable_count = 60;

  int64_t words_per_sentence_min = 2;
  int64_t words_per_sentence_max = 4;

  // Guarantees used by the generator.
  int64_t core_min_occurrences = 10;    // per core word in S
  int64_t special_occurrences = 60;     // per marker/clm word in U^T

  int64_t feature_dim = 16;  // D_mel
  double frame_step_ms = 10.0;
  double train_noise_sigma = 0.05;
  double tts_jitter = 0.05;
};

struct SynthOutput {
  std::vector<SupervisedExample> supervised;
  std::vector<UnsupervisedAudio> audio_only;
  std::vector<UnsupervisedText> text_only;
  std::vector<SupervisedExample> held_out;
  // Full synthesis word list; feeds the G2P table and the TTS vocabulary.
  std::vector<std::string> vocabulary;
};

// Pure function of (config, seed). Audio comes from the synthetic TTS
// oracle plus seeded noise; held-out audio uses a distinct jitter stream of
// the same voice.
SynthOutput SynthCorpora(const CorpusConfig& config, uint64_t seed);

struct PartitionThresholds {
  int64_t rare = 5;     // "occurs fewer than five times"
  int64_t common = 30;  // desk-scaled stand-in for the 150-occurrence bar
  double noisy_sigma = 0.5;
};

struct TestPartitions {
  std::vector<SupervisedExample> vs, noisy, rpn, r_lm, c_lm;
};

// Classifies held-out examples by recounting unigrams in S and U^T:
// RPN if a marker word occurs < rare times in S; else R_LM if some unigram
// is rare in both; else C_LM if some unigram is rare in S but occurs at
// least `common` times in U^T; else VS. Noisy duplicates VS with additive
// feature noise.
TestPartitions PartitionTestSets(
    const std::vector<SupervisedExample>& supervised,
    const std::vector<UnsupervisedText>& text_only,
    const std::vector<SupervisedExample>& held_out,
    const PartitionThresholds& thresholds, uint64_t noise_seed);

// ---- on-disk format ----
// Manifest: one record per line, `id<TAB>text<TAB>feature_offset<TAB>
// feature_len`, offsets and lengths in float32 units into the sidecar
// little-endian feature file. Text-only records use 0/0.

struct CorpusRecord {
  std::string id;
  WordSeq words;
  bool has_audio = false;
  FeatureSequence audio;
};

void WriteCorpusFiles(const std::string& manifest_path,
                      const std::string& features_path,
                      const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> ReadCorpusFiles(const std::string& manifest_path,
                                          const std::string& features_path,
                                          int64_t feature_dim,
                                          double frame_step_ms);

std::vector<CorpusRecord> ToRecords(
    const std::vector<SupervisedExample>& examples);
std::vector<CorpusRecord> ToRecords(
    const std::vector<UnsupervisedAudio>& examples);
std::vector<CorpusRecord> ToRecords(
    const std::vector<UnsupervisedText>& examples);
std::vector<SupervisedExample> RecordsToSupervised(
    const std::vector<CorpusRecord>& records);
std::vector<UnsupervisedAudio> RecordsToAudio(
    const std::vector<CorpusRecord>& records);
std::vector<UnsupervisedText> RecordsToText(
    const std::vector<CorpusRecord>& records);

void SaveWordList(const std::string& path,
                  const std::vector<std::string>& words);
std::vector<std::string> LoadWordList(const std::string& path);

}  // namespace cascade

#endif  // CASCADE_CORPUS_H_
