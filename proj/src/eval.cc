// src/eval.cc

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

#include "cascade/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cascade/encoder.h"
#include "cascade/frontend.h"
#include "cascade/parallel.h"

namespace cascade {

int64_t EditDistance(const WordSeq& ref, const WordSeq& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<int64_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int64_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int64_t ins = cur[j - 1] + 1;
      const int64_t del = prev[j] + 1;
      // Tie order substitution < insertion < deletion fixes the alignment;
      // the minimum is the same either way.
      cur[j] = std::min(sub, std::min(ins, del));
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double Wer(const std::vector<WordSeq>& refs,
           const std::vector<WordSeq>& hyps) {
  CASCADE_CHECK_USAGE(refs.size() == hyps.size(),
                      "Wer: reference/hypothesis count mismatch");
  int64_t errors = 0, ref_words = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    errors += EditDistance(refs[i], hyps[i]);
    ref_words += static_cast<int64_t>(refs[i].size());
  }
  CASCADE_CHECK_USAGE(ref_words > 0, "Wer: empty reference corpus");
  return static_cast<double>(errors) / static_cast<double>(ref_words);
}

double LatticeDensity(const Lattice& lattice, int64_t ref_wordpieces) {
  CASCADE_CHECK_USAGE(ref_wordpieces >= 1,
                      "LatticeDensity: empty reference");
  return static_cast<double>(lattice.arcs.size()) /
         static_cast<double>(ref_wordpieces);
}

StatsSummary AvgDecodingStates(std::span<const DecodeStats> stats) {
  CASCADE_CHECK_USAGE(!stats.empty(), "AvgDecodingStates: empty input");
  StatsSummary out;
  int64_t total_states = 0, total_frames = 0;
  for (const DecodeStats& s : stats) {
    total_states += s.states_expanded;
    total_frames += s.frames;
  }
  out.per_utterance_mean = static_cast<double>(total_states) /
                           static_cast<double>(stats.size());
  out.per_frame_mean = total_frames > 0
                           ? static_cast<double>(total_states) /
                                 static_cast<double>(total_frames)
                           : 0.0;
  return out;
}

const EvalRow& EvalReport::Row(const std::string& name) const {
  for (const EvalRow& row : rows)
    if (row.set_name == name) return row;
  throw UsageError(StrCat("no such test set in report: ", name));
}

EvalReport EvaluateSuite(const ParamStore& params, const ModelConfig& cfg,
                         const WordpieceModel& wpm,
                         const TestPartitions& partitions,
                         const EvalOptions& options) {
  const HatScorer scorer(params, options.causal_path ? "dec.c." : "dec.nc.");
  EvalReport report;
  const std::vector<std::pair<std::string,
                              const std::vector<SupervisedExample>*>>
      sets = {{"vs", &partitions.vs},
              {"noisy", &partitions.noisy},
              {"rpn", &partitions.rpn},
              {"r_lm", &partitions.r_lm},
              {"c_lm", &partitions.c_lm}};
  for (const auto& [name, examples] : sets) {
    CASCADE_CHECK_USAGE(!examples->empty(), "EvaluateSuite: empty partition ",
                        name);
    const int64_t n = static_cast<int64_t>(examples->size());
    std::vector<WordSeq> refs(static_cast<size_t>(n));
    std::vector<WordSeq> hyps(static_cast<size_t>(n));
    std::vector<int64_t> arcs(static_cast<size_t>(n));
    std::vector<int64_t> ref_wp(static_cast<size_t>(n));
    std::vector<DecodeStats> stats(static_cast<size_t>(n));
    ParallelFor(n, options.threads, [&](int64_t i) {
      const SupervisedExample& ex = (*examples)[static_cast<size_t>(i)];
      StackedFeatures sf = StackAndSubsample(ex.audio, cfg.stack, cfg.stride);
      Tape tape;
      ParamVars pv(&tape, &params, /*trainable=*/false);
      Var h = EncodeCausal(pv, cfg, tape.Constant(sf.frames));
      if (!options.causal_path) h = EncodeNonCausal(pv, cfg, h);
      DecodeResult dec = BeamSearch(tape.Value(h), scorer, options.decode);
      refs[static_cast<size_t>(i)] = ex.words;
      if (!dec.nbest.empty())
        hyps[static_cast<size_t>(i)] =
            SplitCharsIntoWords(wpm.DecodeToChars(dec.nbest[0].labels));
      arcs[static_cast<size_t>(i)] =
          static_cast<int64_t>(dec.lattice.arcs.size());
      ref_wp[static_cast<size_t>(i)] =
          static_cast<int64_t>(wpm.Encode(ex.words).size());
      stats[static_cast<size_t>(i)] = dec.stats;
    });

    EvalRow row;
    row.set_name = name;
    row.utterances = n;
    row.wer = Wer(refs, hyps);
    int64_t total_arcs = 0, total_wp = 0;
    for (int64_t i = 0; i < n; ++i) {
      total_arcs += arcs[static_cast<size_t>(i)];
      total_wp += ref_wp[static_cast<size_t>(i)];
    }
    CASCADE_CHECK_USAGE(total_wp > 0, "EvaluateSuite: empty references in ",
                        name);
    row.lattice_density =
        static_cast<double>(total_arcs) / static_cast<double>(total_wp);
    StatsSummary summary = AvgDecodingStates(stats);
    row.avg_states_utt = summary.per_utterance_mean;
    row.avg_states_frame = summary.per_frame_mean;
    report.rows.push_back(std::move(row));
  }
  return report;
}

double RelativeDelta(double candidate, double baseline) {
  if (baseline == 0.0)
    return candidate == 0.0 ? 0.0
                            : std::numeric_limits<double>::infinity();
  return (candidate - baseline) / baseline;
}

std::string FormatDeltaPercent(double delta) {
  char buf[32];
  const double pct = std::abs(delta) * 100.0;
  std::snprintf(buf, sizeof(buf), "%c%.1f%%", delta <= 0.0 ? '-' : '+', pct);
  return buf;
}

std::string RenderTable(const EvalReport& report, const EvalReport* baseline) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s %10s %10s %12s %14s %6s", "set",
                "wer", "density", "states/utt", "states/frame", "utts");
  os << buf << "\n";
  for (const EvalRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-8s %10.4f %10.3f %12.2f %14.3f %6lld",
                  row.set_name.c_str(), row.wer, row.lattice_density,
                  row.avg_states_utt, row.avg_states_frame,
                  static_cast<long long>(row.utterances));
    os << buf << "\n";
  }
  if (baseline != nullptr) {
    os << "\nrelative to baseline:\n";
    std::snprintf(buf, sizeof(buf), "%-8s %10s %10s %12s", "set", "wer",
                  "density", "states/utt");
    os << buf << "\n";
    for (const EvalRow& row : report.rows) {
      const EvalRow& base = baseline->Row(row.set_name);
      std::snprintf(
          buf, sizeof(buf), "%-8s %10s %10s %12s", row.set_name.c_str(),
          FormatDeltaPercent(RelativeDelta(row.wer, base.wer)).c_str(),
          FormatDeltaPercent(
              RelativeDelta(row.lattice_density, base.lattice_density))
              .c_str(),
          FormatDeltaPercent(
              RelativeDelta(row.avg_states_utt, base.avg_states_utt))
              .c_str());
      os << buf << "\n";
    }
  }
  return os.str();
}

void WriteReportCsv(const EvalReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open for write: ", path);
  f << "set,wer,lattice_density,avg_states_utt,avg_states_frame,utterances\n";
  char buf[200];
  for (const EvalRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%lld\n",
                  row.set_name.c_str(), row.wer, row.lattice_density,
                  row.avg_states_utt, row.avg_states_frame,
                  static_cast<long long>(row.utterances));
    f << buf;
  }
  CASCADE_CHECK_RUNTIME(f.good(), "report write failed: ", path);
}

EvalReport ReadReportCsv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open report: ", path);
  EvalReport report;
  std::string line;
  CASCADE_CHECK_RUNTIME(static_cast<bool>(std::getline(f, line)) &&
                            line.rfind("set,", 0) == 0,
                        "not a report csv: ", path);
  int64_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    CASCADE_CHECK_RUNTIME(fields.size() == 6, "report parse error at ", path,
                          ":", line_no);
    EvalRow row;
    row.set_name = fields[0];
    try {
      row.wer = std::stod(fields[1]);
      row.lattice_density = std::stod(fields[2]);
      row.avg_states_utt = std::stod(fields[3]);
      row.avg_states_frame = std::stod(fields[4]);
      row.utterances = std::stoll(fields[5]);
    } catch (const std::exception&) {
      throw RuntimeFailure(StrCat("report parse error at ", path, ":",
                                  line_no));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace cascade
