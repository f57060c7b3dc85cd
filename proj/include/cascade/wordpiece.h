// include/cascade/wordpiece.h

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

#ifndef CASCADE_WORDPIECE_H_
#define CASCADE_WORDPIECE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cascade {

// A sentence as a list of words; the empty string never appears.
using WordSeq = std::vector<std::string>;

// Greedy pair-merge subword model. Ids 0..2 are reserved (blank, unk, mask),
// followed by the single-character units, followed by merged units in merge
// order. Unit surfaces never span word boundaries.
class WordpieceModel {
 public:
  static constexpr int32_t kBlankId = 0;
  static constexpr int32_t kUnkId = 1;
  static constexpr int32_t kMaskId = 2;

  // Trains on the given sentences. Ties between equal-count pairs are broken
  // lexicographically. vocab_size must be at least the character inventory
  // plus the three reserved symbols.
  static WordpieceModel Build(std::span<const WordSeq> texts,
                              int64_t vocab_size);

  int64_t VocabSize() const { return static_cast<int64_t>(units_.size()); }
  int64_t NumMerges() const { return static_cast<int64_t>(merges_.size()); }
  const std::string& Surface(int32_t id) const { return units_[id]; }

  // Encodes one word into piece ids; characters outside the inventory map
  // to the unk id.
  std::vector<int32_t> EncodeWord(const std::string& word) const;

  // Flat piece-id sequence for a sentence.
  std::vector<int32_t> Encode(const WordSeq& words) const;

  // Concatenated surfaces; unk renders as '?', mask as '#'.
  std::string DecodeToChars(std::span<const int32_t> ids) const;

  void Save(const std::string& path) const;
  static WordpieceModel Load(const std::string& path);

 private:
  std::vector<std::string> units_;
  std::vector<std::pair<int32_t, int32_t>> merges_;  // ids of merged pair
  // char -> unit id for single characters
  std::vector<int32_t> char_to_id_ = std::vector<int32_t>(256, -1);
  void RebuildCharIndex();
};

}  // namespace cascade

#endif  // CASCADE_WORDPIECE_H_
