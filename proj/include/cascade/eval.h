// include/cascade/eval.h

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

#ifndef CASCADE_EVAL_H_
#define CASCADE_EVAL_H_

#include <span>
#include <string>
#include <vector>

#include "cascade/corpus.h"
#include "cascade/decode.h"

namespace cascade {

// Unit-cost Levenshtein distance over words. Ties in the alignment prefer
// substitution over insertion over deletion, which fixes the alignment but
// not the count.
int64_t EditDistance(const WordSeq& ref, const WordSeq& hyp);

// (S + D + I) / total reference words, pooled over the corpus.
double Wer(const std::vector<WordSeq>& refs, const std::vector<WordSeq>& hyps);

// Arcs divided by reference wordpieces.
double LatticeDensity(const Lattice& lattice, int64_t ref_wordpieces);

struct StatsSummary {
  double per_utterance_mean = 0.0;
  double per_frame_mean = 0.0;  // pooled: total states / total frames
};
StatsSummary AvgDecodingStates(std::span<const DecodeStats> stats);

struct EvalRow {
  std::string set_name;
  double wer = 0.0;
  double lattice_density = 0.0;
  double avg_states_utt = 0.0;
  double avg_states_frame = 0.0;
  int64_t utterances = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // vs, noisy, rpn, r_lm, c_lm
  const EvalRow& Row(const std::string& name) const;
};

struct EvalOptions {
  DecodeConfig decode;
  // The headline path decodes through the non-causal cascade; the causal
  // decoder is available behind this flag.
  bool causal_path = false;
  int64_t threads = 1;
};

EvalReport EvaluateSuite(const ParamStore& params, const ModelConfig& cfg,
                         const WordpieceModel& wpm,
                         const TestPartitions& partitions,
                         const EvalOptions& options);

// (candidate - baseline) / baseline.
double RelativeDelta(double candidate, double baseline);
// One-decimal signed percentage in the tables' style; zero renders -0.0%.
std::string FormatDeltaPercent(double delta);

std::string RenderTable(const EvalReport& report,
                        const EvalReport* baseline = nullptr);
void WriteReportCsv(const EvalReport& report, const std::string& path);
EvalReport ReadReportCsv(const std::string& path);

}  // namespace cascade

#endif  // CASCADE_EVAL_H_
