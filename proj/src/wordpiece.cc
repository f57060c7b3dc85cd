// src/wordpiece.cc

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

#include "cascade/wordpiece.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "cascade/common.h"

namespace cascade {

namespace {
constexpr const char* kReserved[3] = {"<blk>", "<unk>", "<msk>"};
}

void WordpieceModel::RebuildCharIndex() {
  char_to_id_.assign(256, -1);
  for (size_t i = 3; i < units_.size(); ++i) {
    if (units_[i].size() == 1)
      char_to_id_[static_cast<unsigned char>(units_[i][0])] =
          static_cast<int32_t>(i);
  }
}

WordpieceModel WordpieceModel::Build(std::span<const WordSeq> texts,
                                     int64_t vocab_size) {
  // Character inventory, sorted for a stable id assignment.
  std::set<char> chars;
  std::map<std::string, int64_t> word_counts;
  for (const WordSeq& sent : texts) {
    for (const std::string& w : sent) {
      CASCADE_CHECK_USAGE(!w.empty(), "Build: empty word in training text");
      for (char c : w) chars.insert(c);
      ++word_counts[w];
    }
  }
  const int64_t min_vocab = 3 + static_cast<int64_t>(chars.size());
  CASCADE_CHECK_USAGE(vocab_size >= min_vocab,
                      "Build: vocab_size ", vocab_size,
                      " below character inventory + reserved = ", min_vocab);

  WordpieceModel m;
  for (const char* r : kReserved) m.units_.emplace_back(r);
  for (char c : chars) m.units_.emplace_back(1, c);
  m.RebuildCharIndex();

  // Each word as a unit-id sequence, weighted by corpus frequency.
  std::vector<std::pair<std::vector<int32_t>, int64_t>> words;
  words.reserve(word_counts.size());
  for (const auto& [w, n] : word_counts) {
    std::vector<int32_t> ids;
    for (char c : w) ids.push_back(m.char_to_id_[static_cast<unsigned char>(c)]);
    words.emplace_back(std::move(ids), n);
  }

  while (m.VocabSize() < vocab_size) {
    // Count adjacent pairs.
    std::map<std::pair<int32_t, int32_t>, int64_t> pair_counts;
    for (const auto& [ids, n] : words)
      for (size_t i = 0; i + 1 < ids.size(); ++i)
        pair_counts[{ids[i], ids[i + 1]}] += n;
    if (pair_counts.empty()) break;

    // Highest count wins; equal counts resolve to the lexicographically
    // smallest (left surface, right surface) pair.
    std::pair<int32_t, int32_t> best{-1, -1};
    int64_t best_count = 0;
    for (const auto& [pair, n] : pair_counts) {
      if (n < best_count) continue;
      if (n > best_count) {
        best = pair;
        best_count = n;
        continue;
      }
      auto key = [&](const std::pair<int32_t, int32_t>& p) {
        return std::make_pair(m.units_[p.first], m.units_[p.second]);
      };
      if (key(pair) < key(best)) best = pair;
    }

    const int32_t new_id = static_cast<int32_t>(m.VocabSize());
    m.units_.push_back(m.units_[best.first] + m.units_[best.second]);
    m.merges_.push_back(best);
    for (auto& [ids, n] : words) {
      std::vector<int32_t> merged;
      merged.reserve(ids.size());
      for (size_t i = 0; i < ids.size(); ++i) {
        if (i + 1 < ids.size() && ids[i] == best.first &&
            ids[i + 1] == best.second) {
          merged.push_back(new_id);
          ++i;
        } else {
          merged.push_back(ids[i]);
        }
      }
      ids = std::move(merged);
    }
  }
  return m;
}

std::vector<int32_t> WordpieceModel::EncodeWord(const std::string& word) const {
  std::vector<int32_t> ids;
  ids.reserve(word.size());
  for (char c : word) {
    int32_t id = char_to_id_[static_cast<unsigned char>(c)];
    ids.push_back(id >= 0 ? id : kUnkId);
  }
  // Unit ids are laid out as [reserved][chars][merges], so rule r created
  // unit first_merged + r.
  const int32_t first_merged =
      static_cast<int32_t>(units_.size() - merges_.size());
  for (size_t rule = 0; rule < merges_.size(); ++rule) {
    const auto [left, right] = merges_[rule];
    std::vector<int32_t> out;
    out.reserve(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
      if (i + 1 < ids.size() && ids[i] == left && ids[i + 1] == right) {
        out.push_back(first_merged + static_cast<int32_t>(rule));
        ++i;
      } else {
        out.push_back(ids[i]);
      }
    }
    ids = std::move(out);
  }
  return ids;
}

std::vector<int32_t> WordpieceModel::Encode(const WordSeq& words) const {
  std::vector<int32_t> out;
  for (const std::string& w : words) {
    auto ids = EncodeWord(w);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

std::string WordpieceModel::DecodeToChars(std::span<const int32_t> ids) const {
  std::string out;
  for (int32_t id : ids) {
    CASCADE_CHECK_USAGE(id >= 0 && id < VocabSize(),
                        "DecodeToChars: id out of range: ", id);
    if (id == kBlankId) continue;
    if (id == kUnkId) {
      out += '?';
    } else if (id == kMaskId) {
      out += '#';
    } else {
      out += units_[id];
    }
  }
  return out;
}

void WordpieceModel::Save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open for write: ", path);
  f << "wordpiece 1\n" << units_.size() << " " << merges_.size() << "\n";
  for (size_t i = 3; i < units_.size(); ++i) f << units_[i] << "\n";
  for (const auto& [l, r] : merges_) f << l << " " << r << "\n";
  CASCADE_CHECK_RUNTIME(f.good(), "write failed: ", path);
}

WordpieceModel WordpieceModel::Load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open: ", path);
  std::string tag;
  int version = 0;
  size_t n_units = 0, n_merges = 0;
  f >> tag >> version >> n_units >> n_merges;
  CASCADE_CHECK_RUNTIME(f.good() && tag == "wordpiece" && version == 1,
                        "not a wordpiece model file: ", path);
  WordpieceModel m;
  for (const char* r : kReserved) m.units_.emplace_back(r);
  for (size_t i = 3; i < n_units; ++i) {
    std::string u;
    f >> u;
    CASCADE_CHECK_RUNTIME(f.good() && !u.empty(),
                          "truncated wordpiece file: ", path);
    m.units_.push_back(u);
  }
  for (size_t i = 0; i < n_merges; ++i) {
    int32_t l, r;
    f >> l >> r;
    CASCADE_CHECK_RUNTIME(f.good(), "truncated wordpiece file: ", path);
    m.merges_.emplace_back(l, r);
  }
  m.RebuildCharIndex();
  return m;
}

}  // namespace cascade
