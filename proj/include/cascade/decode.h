// include/cascade/decode.h

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

#ifndef CASCADE_DECODE_H_
#define CASCADE_DECODE_H_

#include <string>
#include <vector>

#include "cascade/transducer.h"

namespace cascade {

struct DecodeConfig {
  int64_t beam_width = 4;
  int64_t max_symbols_per_frame = 4;
  int64_t nbest = 4;
};

struct Hypothesis {
  std::vector<int32_t> labels;
  double log_score = 0.0;  // sum of chosen log-probabilities along its path
};

struct LatticeArc {
  int32_t from = 0;
  int32_t to = 0;
  int32_t wordpiece = 0;
  double log_weight = 0.0;  // emission plus the blanks since the last event
};

// DAG over (frame, label-prefix) states. Final nodes carry the trailing
// score mass after the last emission, so any surviving hypothesis's score
// equals the sum of its arc weights plus its final weight.
struct Lattice {
  int64_t num_nodes = 1;  // node 0 is the start
  int32_t start = 0;
  std::vector<LatticeArc> arcs;
  std::vector<std::pair<int32_t, double>> finals;
};

struct DecodeStats {
  int64_t states_expanded = 0;  // joint evaluations over (hypothesis, frame)
  int64_t frames = 0;
  int64_t beam_width = 0;
};

struct DecodeResult {
  std::vector<Hypothesis> nbest;
  Lattice lattice;
  DecodeStats stats;
};

// Frame-synchronous transducer beam search with per-frame symbol cap.
// Hypotheses with identical label sequences merge by log-sum-exp at every
// pruning point; nbest sorts by score, ties to the shorter then
// lexicographically smaller sequence.
DecodeResult BeamSearch(const Tensor& enc_frames, const HatScorer& scorer,
                        const DecodeConfig& cfg);

// Text format: header `lattice <nodes> <arcs>`, a `finals` line of
// id:logweight pairs, then one arc per line
// `from<TAB>to<TAB>wordpiece<TAB>logweight`.
void WriteLattice(const Lattice& lattice, const std::string& path);
Lattice ReadLattice(const std::string& path);
std::string FormatLattice(const Lattice& lattice);

}  // namespace cascade

#endif  // CASCADE_DECODE_H_
