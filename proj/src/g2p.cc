// src/g2p.cc

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

#include "cascade/g2p.h"

#include "cascade/common.h"

namespace cascade {

namespace {

constexpr const char kVowels[] = "aeiou";

bool IsVowel(char c) {
  for (char v : kVowels)
    if (c == v && v != '\0') return true;
  return false;
}

bool IsLetter(char c) { return c >= 'a' && c <= 'z'; }

// Consonant index in a-z order with vowels removed.
int32_t ConsonantIndex(char c) {
  int32_t idx = 0;
  for (char x = 'a'; x < c; ++x)
    if (!IsVowel(x)) ++idx;
  return idx;
}

int32_t VowelIndex(char c) {
  for (int32_t i = 0; i < 5; ++i)
    if (kVowels[i] == c) return i;
  return -1;
}

int32_t LetterPhoneme(char c) { return c - 'a'; }

int32_t DigraphPhoneme(char cons, char vowel) {
  return G2p::kNumLetters + ConsonantIndex(cons) * 5 + VowelIndex(vowel);
}

}  // namespace

std::vector<int32_t> G2p::FallbackPhonemes(const std::string& word) {
  std::vector<int32_t> out;
  for (char c : word) {
    if (!IsLetter(c)) continue;
    out.push_back(LetterPhoneme(c));
  }
  return out;
}

std::vector<int32_t> G2p::GreedyPhonemes(const std::string& word) {
  std::vector<int32_t> out;
  size_t i = 0;
  while (i < word.size()) {
    const char c = word[i];
    if (!IsLetter(c)) {
      ++i;
      continue;
    }
    if (!IsVowel(c) && i + 1 < word.size() && IsVowel(word[i + 1])) {
      out.push_back(DigraphPhoneme(c, word[i + 1]));
      i += 2;
    } else {
      out.push_back(LetterPhoneme(c));
      ++i;
    }
  }
  return out;
}

std::string G2p::PhonemeName(int32_t id) {
  CASCADE_CHECK_USAGE(id >= 0 && id < kInventorySize,
                      "PhonemeName: id out of range: ", id);
  if (id < kNumLetters) return std::string(1, static_cast<char>('A' + id));
  if (id == kMaskPhoneme) return "<msk>";
  int32_t d = id - kNumLetters;
  int32_t ci = d / 5, vi = d % 5;
  char cons = 0;
  int32_t seen = 0;
  for (char x = 'a'; x <= 'z'; ++x) {
    if (IsVowel(x)) continue;
    if (seen++ == ci) {
      cons = x;
      break;
    }
  }
  std::string s(1, static_cast<char>(cons - 'a' + 'A'));
  s += static_cast<char>(kVowels[vi] - 'a' + 'A');
  return s;
}

G2p::G2p(std::span<const std::string> table_words) {
  for (const std::string& w : table_words) table_[w] = GreedyPhonemes(w);
}

PhonemeSequence G2p::Phonemize(const WordSeq& words) const {
  PhonemeSequence out;
  for (const std::string& w : words) {
    auto it = table_.find(w);
    const std::vector<int32_t> ph =
        it != table_.end() ? it->second : FallbackPhonemes(w);
    out.ids.insert(out.ids.end(), ph.begin(), ph.end());
  }
  out.masked.assign(out.ids.size(), false);
  return out;
}

}  // namespace cascade
