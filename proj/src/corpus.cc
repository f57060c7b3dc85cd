// src/corpus.cc

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

#include "cascade/corpus.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cascade/rng.h"
#include "cascade/tts.h"

namespace cascade {

bool IsMarkerWord(const std::string& word) {
  return word.size() >= 2 && word[0] == 'z' && word[1] == 'z';
}

WordSeq SplitCharsIntoWords(const std::string& chars) {
  WordSeq out;
  std::string cur;
  for (char c : chars) {
    cur += c;
    if (c == 'o') {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string JoinWords(const WordSeq& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

namespace {

// Zipf-like sampler over an ordered word list: weight(rank k) = 1/(k + 2).
class ZipfSampler {
 public:
  explicit ZipfSampler(const std::vector<std::string>* words) : words_(words) {
    cum_.reserve(words->size());
    double total = 0.0;
    for (size_t k = 0; k < words->size(); ++k) {
      total += 1.0 / static_cast<double>(k + 2);
      cum_.push_back(total);
    }
  }

  const std::string& Sample(Rng& rng) const {
    double u = rng.Uniform() * cum_.back();
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    size_t idx = static_cast<size_t>(it - cum_.begin());
    if (idx >= words_->size()) idx = words_->size() - 1;
    return (*words_)[idx];
  }

 private:
  const std::vector<std::string>* words_;
  std::vector<double> cum_;
};

template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
    int64_t j = rng.UniformInt(0, i);
    std::swap(v[i], v[static_cast<size_t>(j)]);
  }
}

std::string FormatId(const char* prefix, int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06lld", prefix,
                static_cast<long long>(i));
  return buf;
}

}  // namespace

SynthOutput SynthCorpora(const CorpusConfig& cfg, uint64_t seed) {
  CASCADE_CHECK_USAGE(cfg.supervised_size >= 1 && cfg.audio_only_size >= 1 &&
                          cfg.text_only_size >= 1 && cfg.held_out_size >= 1,
                      "SynthCorpora: corpus sizes must be >= 1");
  CASCADE_CHECK_USAGE(cfg.supervised_size <= cfg.max_corpus_size &&
                          cfg.audio_only_size <= cfg.max_corpus_size &&
                          cfg.text_only_size <= cfg.max_corpus_size &&
                          cfg.held_out_size <= cfg.max_corpus_size,
                      "SynthCorpora: size exceeds max_corpus_size = ",
                      cfg.max_corpus_size);
  CASCADE_CHECK_USAGE(cfg.words_per_sentence_min >= 1 &&
                          cfg.words_per_sentence_max >=
                              cfg.words_per_sentence_min,
                      "SynthCorpora: bad sentence length range");

  // --- vocabulary ---
  // Syllables are consonant+vowel with 'o' reserved as the word terminator
  // and 'z' reserved for the marker prefix.
  const std::string consonants = "bcdfghjklmnpqrstvwxy";
  const std::string vowels = "aeiu";
  const int64_t max_syll =
      static_cast<int64_t>(consonants.size() * vowels.size());
  CASCADE_CHECK_USAGE(cfg.syllable_count >= 4 && cfg.syllable_count <= max_syll,
                      "SynthCorpora: syllable_count out of range");
  Rng vocab_rng(DeriveSeed(seed, "vocabulary"));
  std::vector<std::string> syllables;
  {
    std::set<std::string> used;
    while (static_cast<int64_t>(syllables.size()) < cfg.syllable_count) {
      std::string s;
      s += consonants[vocab_rng.UniformInt(
          0, static_cast<int64_t>(consonants.size()) - 1)];
      s += vowels[vocab_rng.UniformInt(
          0, static_cast<int64_t>(vowels.size()) - 1)];
      if (used.insert(s).second) syllables.push_back(s);
    }
  }

  std::set<std::string> all_words;
  auto make_words = [&](int64_t count, int64_t syl_min, int64_t syl_max,
                        const std::string& prefix) {
    std::vector<std::string> out;
    int64_t attempts = 0;
    while (static_cast<int64_t>(out.size()) < count) {
      CASCADE_CHECK_RUNTIME(++attempts < 100000 * (count + 1),
                            "SynthCorpora: word space exhausted");
      std::string w = prefix;
      const int64_t n = vocab_rng.UniformInt(syl_min, syl_max);
      for (int64_t i = 0; i < n; ++i)
        w += syllables[static_cast<size_t>(
            vocab_rng.UniformInt(0, cfg.syllable_count - 1))];
      w += 'o';
      if (all_words.insert(w).second) out.push_back(w);
    }
    return out;
  };

  const auto core = make_words(cfg.core_words, 1, 2, "");
  const auto breadth = make_words(cfg.breadth_words, 2, 3, "");
  const auto rare = make_words(cfg.rare_stratum_count, 2, 2, "");
  const auto markers = make_words(cfg.marker_word_count, 1, 2, "zz");
  const auto clm = make_words(cfg.clm_word_count, 2, 3, "");

  SynthOutput out;
  out.vocabulary.insert(out.vocabulary.end(), core.begin(), core.end());
  out.vocabulary.insert(out.vocabulary.end(), breadth.begin(), breadth.end());
  out.vocabulary.insert(out.vocabulary.end(), rare.begin(), rare.end());
  out.vocabulary.insert(out.vocabulary.end(), markers.begin(), markers.end());
  out.vocabulary.insert(out.vocabulary.end(), clm.begin(), clm.end());

  const TtsOracle tts_train(out.vocabulary, cfg.feature_dim,
                            DeriveSeed(seed, "tts-voice"),
                            DeriveSeed(seed, "tts-train"), cfg.tts_jitter,
                            cfg.frame_step_ms);
  // Held-out audio: same voice, independent jitter stream.
  const TtsOracle tts_test(out.vocabulary, cfg.feature_dim,
                           DeriveSeed(seed, "tts-voice"),
                           DeriveSeed(seed, "tts-test"), cfg.tts_jitter,
                           cfg.frame_step_ms);

  const ZipfSampler core_sampler(&core);
  std::vector<std::string> wide;
  wide.insert(wide.end(), core.begin(), core.end());
  wide.insert(wide.end(), breadth.begin(), breadth.end());
  const ZipfSampler wide_sampler(&wide);

  auto sentence_len = [&](Rng& rng) {
    return rng.UniformInt(cfg.words_per_sentence_min,
                          cfg.words_per_sentence_max);
  };
  auto fill_sentence = [&](Rng& rng, const ZipfSampler& sampler, int64_t len) {
    WordSeq s;
    for (int64_t i = 0; i < len; ++i) s.push_back(sampler.Sample(rng));
    return s;
  };
  // Sentence carrying one special word in a random slot.
  auto special_sentence = [&](Rng& rng, const std::string& special,
                              const ZipfSampler& filler) {
    WordSeq s = fill_sentence(rng, filler, sentence_len(rng));
    s[static_cast<size_t>(
        rng.UniformInt(0, static_cast<int64_t>(s.size()) - 1))] = special;
    return s;
  };

  // --- supervised corpus S ---
  // Rare-stratum words occur 1..4 times; core words are guaranteed at least
  // core_min_occurrences by a round-robin coverage block; markers and C_LM
  // words never occur.
  Rng s_rng(DeriveSeed(seed, "supervised"));
  std::vector<WordSeq> s_sents;
  for (size_t i = 0; i < rare.size(); ++i) {
    const int64_t occurrences = 1 + static_cast<int64_t>(i % 4);
    for (int64_t k = 0; k < occurrences; ++k)
      s_sents.push_back(special_sentence(s_rng, rare[i], core_sampler));
  }
  {
    const int64_t tokens = cfg.core_words * cfg.core_min_occurrences;
    int64_t emitted = 0;
    while (emitted < tokens) {
      const int64_t len = sentence_len(s_rng);
      WordSeq s;
      for (int64_t i = 0; i < len; ++i)
        s.push_back(core[static_cast<size_t>((emitted + i) %
                                             cfg.core_words)]);
      emitted += len;
      s_sents.push_back(std::move(s));
    }
  }
  CASCADE_CHECK_USAGE(
      static_cast<int64_t>(s_sents.size()) <= cfg.supervised_size,
      "SynthCorpora: supervised_size ", cfg.supervised_size,
      " too small for the configured strata (needs >= ", s_sents.size(), ")");
  while (static_cast<int64_t>(s_sents.size()) < cfg.supervised_size)
    s_sents.push_back(fill_sentence(s_rng, core_sampler, sentence_len(s_rng)));
  Shuffle(s_sents, s_rng);
  for (int64_t i = 0; i < cfg.supervised_size; ++i) {
    SupervisedExample ex;
    ex.id = FormatId("s", i);
    ex.words = std::move(s_sents[static_cast<size_t>(i)]);
    ex.audio = AddFeatureNoise(tts_train.Synthesize(ex.words),
                               cfg.train_noise_sigma,
                               DeriveSeed(seed, "s-noise", i));
    out.supervised.push_back(std::move(ex));
  }

  // --- unpaired text U^T ---
  // Broader vocabulary than S; markers and C_LM words each appear
  // special_occurrences times; rare-stratum words never appear.
  Rng t_rng(DeriveSeed(seed, "text-only"));
  std::vector<WordSeq> t_sents;
  for (const auto& list : {markers, clm})
    for (const std::string& w : list)
      for (int64_t k = 0; k < cfg.special_occurrences; ++k)
        t_sents.push_back(special_sentence(t_rng, w, wide_sampler));
  CASCADE_CHECK_USAGE(
      static_cast<int64_t>(t_sents.size()) <= cfg.text_only_size,
      "SynthCorpora: text_only_size ", cfg.text_only_size,
      " too small for the configured strata (needs >= ", t_sents.size(), ")");
  while (static_cast<int64_t>(t_sents.size()) < cfg.text_only_size)
    t_sents.push_back(fill_sentence(t_rng, wide_sampler, sentence_len(t_rng)));
  Shuffle(t_sents, t_rng);
  for (int64_t i = 0; i < cfg.text_only_size; ++i) {
    UnsupervisedText ex;
    ex.id = FormatId("ut", i);
    ex.words = std::move(t_sents[static_cast<size_t>(i)]);
    out.text_only.push_back(std::move(ex));
  }

  // --- unpaired audio U^S ---
  Rng a_rng(DeriveSeed(seed, "audio-only"));
  std::vector<std::string> acoustic = wide;
  acoustic.insert(acoustic.end(), markers.begin(), markers.end());
  const ZipfSampler acoustic_sampler(&acoustic);
  for (int64_t i = 0; i < cfg.audio_only_size; ++i) {
    UnsupervisedAudio ex;
    ex.id = FormatId("us", i);
    WordSeq words =
        fill_sentence(a_rng, acoustic_sampler, sentence_len(a_rng));
    ex.audio = AddFeatureNoise(tts_train.Synthesize(words),
                               cfg.train_noise_sigma,
                               DeriveSeed(seed, "us-noise", i));
    out.audio_only.push_back(std::move(ex));
  }

  // --- held-out pool ---
  Rng h_rng(DeriveSeed(seed, "held-out"));
  const int64_t n_rpn = cfg.held_out_size / 5;
  const int64_t n_rlm = cfg.held_out_size / 5;
  const int64_t n_clm = cfg.held_out_size / 5;
  std::vector<WordSeq> h_sents;
  for (int64_t i = 0; i < n_rpn; ++i)
    h_sents.push_back(special_sentence(
        h_rng, markers[static_cast<size_t>(i % (int64_t)markers.size())],
        core_sampler));
  for (int64_t i = 0; i < n_rlm; ++i)
    h_sents.push_back(special_sentence(
        h_rng, rare[static_cast<size_t>(i % (int64_t)rare.size())],
        core_sampler));
  for (int64_t i = 0; i < n_clm; ++i)
    h_sents.push_back(special_sentence(
        h_rng, clm[static_cast<size_t>(i % (int64_t)clm.size())],
        core_sampler));
  while (static_cast<int64_t>(h_sents.size()) < cfg.held_out_size)
    h_sents.push_back(fill_sentence(h_rng, core_sampler, sentence_len(h_rng)));
  Shuffle(h_sents, h_rng);
  for (int64_t i = 0; i < cfg.held_out_size; ++i) {
    SupervisedExample ex;
    ex.id = FormatId("test", i);
    ex.words = std::move(h_sents[static_cast<size_t>(i)]);
    ex.audio = tts_test.Synthesize(ex.words);
    out.held_out.push_back(std::move(ex));
  }
  return out;
}

TestPartitions PartitionTestSets(
    const std::vector<SupervisedExample>& supervised,
    const std::vector<UnsupervisedText>& text_only,
    const std::vector<SupervisedExample>& held_out,
    const PartitionThresholds& thresholds, uint64_t noise_seed) {
  CASCADE_CHECK_USAGE(!held_out.empty(),
                      "PartitionTestSets: empty held-out pool");
  std::set<std::string> train_ids;
  for (const auto& ex : supervised) train_ids.insert(ex.id);
  for (const auto& ex : held_out)
    CASCADE_CHECK_USAGE(train_ids.count(ex.id) == 0,
                        "PartitionTestSets: held-out id also in S: ", ex.id);

  std::map<std::string, int64_t> s_counts, t_counts;
  for (const auto& ex : supervised)
    for (const auto& w : ex.words) ++s_counts[w];
  for (const auto& ex : text_only)
    for (const auto& w : ex.words) ++t_counts[w];
  auto count_of = [](const std::map<std::string, int64_t>& m,
                     const std::string& w) {
    auto it = m.find(w);
    return it == m.end() ? int64_t{0} : it->second;
  };

  TestPartitions parts;
  for (const auto& ex : held_out) {
    bool is_rpn = false, is_rlm = false, is_clm = false;
    for (const auto& w : ex.words) {
      const int64_t cs = count_of(s_counts, w);
      if (cs >= thresholds.rare) continue;
      if (IsMarkerWord(w)) is_rpn = true;
      const int64_t ct = count_of(t_counts, w);
      if (ct < thresholds.rare) is_rlm = true;
      if (ct >= thresholds.common) is_clm = true;
    }
    if (is_rpn) {
      parts.rpn.push_back(ex);
    } else if (is_rlm) {
      parts.r_lm.push_back(ex);
    } else if (is_clm) {
      parts.c_lm.push_back(ex);
    } else {
      parts.vs.push_back(ex);
    }
  }
  int64_t i = 0;
  for (const auto& ex : parts.vs) {
    SupervisedExample noisy = ex;
    noisy.id = ex.id + "-noisy";
    noisy.audio = AddFeatureNoise(ex.audio, thresholds.noisy_sigma,
                                  DeriveSeed(noise_seed, "noisy", i++));
    parts.noisy.push_back(std::move(noisy));
  }
  return parts;
}

// ---------------------------------------------------------------------------
// On-disk corpus format

static_assert(std::endian::native == std::endian::little,
              "feature files are little-endian");

void WriteCorpusFiles(const std::string& manifest_path,
                      const std::string& features_path,
                      const std::vector<CorpusRecord>& records) {
  std::ofstream mf(manifest_path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(mf.good(), "cannot open for write: ", manifest_path);
  std::ofstream ff(features_path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(ff.good(), "cannot open for write: ", features_path);
  int64_t offset = 0;
  std::vector<float> buf;
  for (const CorpusRecord& r : records) {
    int64_t len = 0;
    if (r.has_audio) {
      const auto& data = r.audio.frames.data();
      buf.assign(data.begin(), data.end());
      ff.write(reinterpret_cast<const char*>(buf.data()),
               static_cast<std::streamsize>(buf.size() * sizeof(float)));
      len = static_cast<int64_t>(buf.size());
    }
    mf << r.id << '\t' << JoinWords(r.words) << '\t' << offset << '\t' << len
       << '\n';
    offset += len;
  }
  CASCADE_CHECK_RUNTIME(mf.good() && ff.good(), "corpus write failed");
}

std::vector<CorpusRecord> ReadCorpusFiles(const std::string& manifest_path,
                                          const std::string& features_path,
                                          int64_t feature_dim,
                                          double frame_step_ms) {
  std::ifstream mf(manifest_path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(mf.good(), "cannot open: ", manifest_path);
  std::ifstream ff(features_path, std::ios::binary);

  std::vector<CorpusRecord> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(mf, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    CASCADE_CHECK_RUNTIME(fields.size() == 4, "manifest line ", line_no,
                          ": expected 4 tab-separated fields");
    CorpusRecord r;
    r.id = fields[0];
    std::istringstream ws(fields[1]);
    std::string w;
    while (ws >> w) r.words.push_back(w);
    int64_t offset = 0, len = 0;
    try {
      offset = std::stoll(fields[2]);
      len = std::stoll(fields[3]);
    } catch (const std::exception&) {
      throw RuntimeFailure(StrCat("manifest line ", line_no,
                                  ": bad offset/length"));
    }
    if (len > 0) {
      CASCADE_CHECK_RUNTIME(ff.good(), "feature file missing or unreadable: ",
                            features_path);
      CASCADE_CHECK_RUNTIME(len % feature_dim == 0, "manifest line ", line_no,
                            ": feature length not divisible by dim ",
                            feature_dim);
      std::vector<float> buf(static_cast<size_t>(len));
      ff.seekg(static_cast<std::streamoff>(offset * sizeof(float)));
      ff.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
      CASCADE_CHECK_RUNTIME(ff.gcount() ==
                                static_cast<std::streamsize>(len * 4),
                            "feature file truncated at record ", r.id);
      r.has_audio = true;
      r.audio.frame_step_ms = frame_step_ms;
      r.audio.frames = Tensor({len / feature_dim, feature_dim});
      for (int64_t i = 0; i < len; ++i)
        r.audio.frames[i] = static_cast<double>(buf[static_cast<size_t>(i)]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CorpusRecord> ToRecords(
    const std::vector<SupervisedExample>& examples) {
  std::vector<CorpusRecord> out;
  for (const auto& e : examples)
    out.push_back({e.id, e.words, true, e.audio});
  return out;
}

std::vector<CorpusRecord> ToRecords(
    const std::vector<UnsupervisedAudio>& examples) {
  std::vector<CorpusRecord> out;
  for (const auto& e : examples) out.push_back({e.id, {}, true, e.audio});
  return out;
}

std::vector<CorpusRecord> ToRecords(
    const std::vector<UnsupervisedText>& examples) {
  std::vector<CorpusRecord> out;
  for (const auto& e : examples)
    out.push_back({e.id, e.words, false, FeatureSequence{}});
  return out;
}

std::vector<SupervisedExample> RecordsToSupervised(
    const std::vector<CorpusRecord>& records) {
  std::vector<SupervisedExample> out;
  for (const auto& r : records) {
    CASCADE_CHECK_RUNTIME(r.has_audio && !r.words.empty(),
                          "record is not a supervised example: ", r.id);
    out.push_back({r.audio, r.words, r.id});
  }
  return out;
}

std::vector<UnsupervisedAudio> RecordsToAudio(
    const std::vector<CorpusRecord>& records) {
  std::vector<UnsupervisedAudio> out;
  for (const auto& r : records) {
    CASCADE_CHECK_RUNTIME(r.has_audio, "record has no audio: ", r.id);
    out.push_back({r.audio, r.id});
  }
  return out;
}

std::vector<UnsupervisedText> RecordsToText(
    const std::vector<CorpusRecord>& records) {
  std::vector<UnsupervisedText> out;
  for (const auto& r : records) {
    CASCADE_CHECK_RUNTIME(!r.words.empty(), "record has no text: ", r.id);
    out.push_back({r.words, r.id});
  }
  return out;
}

void SaveWordList(const std::string& path,
                  const std::vector<std::string>& words) {
  std::ofstream f(path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open for write: ", path);
  for (const auto& w : words) f << w << '\n';
  CASCADE_CHECK_RUNTIME(f.good(), "write failed: ", path);
}

std::vector<std::string> LoadWordList(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open: ", path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace cascade
