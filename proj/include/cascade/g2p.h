// include/cascade/g2p.h

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

#ifndef CASCADE_G2P_H_
#define CASCADE_G2P_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cascade/frontend.h"
#include "cascade/wordpiece.h"

namespace cascade {

// Deterministic per-word grapheme-to-phoneme lookup over a closed phoneme
// inventory: 26 single-letter units, 21x5 consonant-vowel digraphs, and a
// mask unit. Words in the table phonemize by greedy digraph chunking;
// everything else falls back to one phoneme per character.
class G2p {
 public:
  static constexpr int32_t kNumLetters = 26;
  static constexpr int32_t kNumDigraphs = 21 * 5;
  static constexpr int32_t kMaskPhoneme = kNumLetters + kNumDigraphs;  // 131
  static constexpr int32_t kInventorySize = kMaskPhoneme + 1;          // 132

  G2p() = default;
  explicit G2p(std::span<const std::string> table_words);

  // Total function: never throws. Unlisted words use the per-character
  // fallback; non-letter characters are skipped.
  PhonemeSequence Phonemize(const WordSeq& words) const;

  bool InTable(const std::string& word) const {
    return table_.count(word) != 0;
  }

  static std::vector<int32_t> FallbackPhonemes(const std::string& word);
  static std::vector<int32_t> GreedyPhonemes(const std::string& word);
  static std::string PhonemeName(int32_t id);

 private:
  std::map<std::string, std::vector<int32_t>> table_;
};

}  // namespace cascade

#endif  // CASCADE_G2P_H_
