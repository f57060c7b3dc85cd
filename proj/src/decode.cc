// src/decode.cc

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

#include "cascade/decode.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace cascade {

namespace {

struct Event {
  int64_t frame;
  int32_t label;
  double score_after;
};

struct BeamHyp {
  std::vector<int32_t> labels;
  double score = 0.0;
  std::vector<double> state;
  std::vector<Event> events;
};

// Score descending; ties prefer shorter, then lexicographically smaller
// label sequences.
bool Better(const BeamHyp& a, const BeamHyp& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.labels.size() != b.labels.size())
    return a.labels.size() < b.labels.size();
  return a.labels < b.labels;
}

std::vector<BeamHyp> TopK(std::map<std::vector<int32_t>, BeamHyp>& pool,
                          int64_t k) {
  std::vector<BeamHyp> out;
  out.reserve(pool.size());
  for (auto& [labels, hyp] : pool) out.push_back(std::move(hyp));
  std::sort(out.begin(), out.end(), Better);
  if (static_cast<int64_t>(out.size()) > k)
    out.resize(static_cast<size_t>(k));
  return out;
}

}  // namespace

DecodeResult BeamSearch(const Tensor& enc_frames, const HatScorer& scorer,
                        const DecodeConfig& cfg) {
  CASCADE_CHECK_USAGE(enc_frames.Rank() == 2 && enc_frames.Rows() >= 1,
                      "BeamSearch: empty encoder output");
  CASCADE_CHECK_USAGE(cfg.beam_width >= 1 && cfg.max_symbols_per_frame >= 1,
                      "BeamSearch: beam_width and max_symbols must be >= 1");
  const int64_t frames = enc_frames.Rows();
  const int64_t dim = enc_frames.Cols();
  const int64_t n_labels = scorer.vocab_size() - 1;

  DecodeResult result;
  result.stats.frames = frames;
  result.stats.beam_width = cfg.beam_width;

  std::vector<BeamHyp> beam(1);
  beam[0].state = scorer.StartState();

  for (int64_t t = 0; t < frames; ++t) {
    std::span<const double> enc_row(enc_frames.data().data() + t * dim,
                                    static_cast<size_t>(dim));
    // Hypotheses that consumed frame t via a blank, merged by labels.
    std::map<std::vector<int32_t>, BeamHyp> pool;
    std::vector<BeamHyp> cur = std::move(beam);
    for (int64_t round = 0; round <= cfg.max_symbols_per_frame; ++round) {
      if (cur.empty()) break;
      struct Candidate {
        size_t parent;
        int32_t label;
        double score;
      };
      std::vector<Candidate> cands;
      for (size_t h = 0; h < cur.size(); ++h) {
        BeamHyp& hyp = cur[h];
        ++result.stats.states_expanded;
        HatScorer::LogScores ls = scorer.Score(enc_row, hyp.state);
        // Blank: this alignment is done with frame t. Identical label
        // sequences merge by log-sum-exp; the stronger branch keeps its
        // alignment trace.
        BeamHyp done = hyp;
        done.score += ls.log_blank;
        auto [it, inserted] = pool.try_emplace(done.labels, done);
        if (!inserted) {
          BeamHyp& kept = it->second;
          const double merged = LogSumExp2(kept.score, done.score);
          if (done.score > kept.score) kept = std::move(done);
          kept.score = merged;
        }
        if (round < cfg.max_symbols_per_frame) {
          for (int32_t v = 1; v <= n_labels; ++v)
            cands.push_back(
                {h, v, hyp.score + ls.log_label[static_cast<size_t>(v - 1)]});
        }
      }
      if (cands.empty()) break;
      // Within a frame every candidate's label sequence is unique, so
      // pruning needs no merge; sort and keep the beam.
      std::sort(cands.begin(), cands.end(),
                [&](const Candidate& a, const Candidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  const auto& la = cur[a.parent].labels;
                  const auto& lb = cur[b.parent].labels;
                  if (la.size() != lb.size()) return la.size() < lb.size();
                  if (la != lb) return la < lb;
                  return a.label < b.label;
                });
      if (static_cast<int64_t>(cands.size()) > cfg.beam_width)
        cands.resize(static_cast<size_t>(cfg.beam_width));
      std::vector<BeamHyp> next;
      next.reserve(cands.size());
      for (const Candidate& c : cands) {
        const BeamHyp& parent = cur[c.parent];
        BeamHyp ext;
        ext.labels = parent.labels;
        ext.labels.push_back(c.label);
        ext.score = c.score;
        ext.state = scorer.NextState(parent.state, c.label);
        ext.events = parent.events;
        ext.events.push_back({t, c.label, c.score});
        next.push_back(std::move(ext));
      }
      cur = std::move(next);
    }
    beam = TopK(pool, cfg.beam_width);
  }

  // Lattice over (emission frame, label prefix) states from every
  // surviving hypothesis; shared prefixes collapse onto shared arcs.
  std::map<std::pair<int64_t, std::vector<int32_t>>, int32_t> node_ids;
  std::map<std::tuple<int32_t, int32_t, int32_t>, double> arc_set;
  result.lattice.start = 0;
  int32_t next_node = 1;
  for (const BeamHyp& hyp : beam) {
    int32_t prev = 0;
    double prev_score = 0.0;
    std::vector<int32_t> prefix;
    for (const Event& e : hyp.events) {
      prefix.push_back(e.label);
      auto [it, inserted] =
          node_ids.try_emplace(std::make_pair(e.frame, prefix), next_node);
      if (inserted) ++next_node;
      const int32_t node = it->second;
      arc_set.try_emplace(std::make_tuple(prev, node, e.label),
                          e.score_after - prev_score);
      prev = node;
      prev_score = e.score_after;
    }
    result.lattice.finals.emplace_back(prev, hyp.score - prev_score);
  }
  result.lattice.num_nodes = next_node;
  for (const auto& [key, weight] : arc_set)
    result.lattice.arcs.push_back({std::get<0>(key), std::get<1>(key),
                                   std::get<2>(key), weight});

  const int64_t n = std::min<int64_t>(cfg.nbest,
                                      static_cast<int64_t>(beam.size()));
  for (int64_t i = 0; i < n; ++i)
    result.nbest.push_back({beam[static_cast<size_t>(i)].labels,
                            beam[static_cast<size_t>(i)].score});
  return result;
}

std::string FormatLattice(const Lattice& lattice) {
  std::ostringstream os;
  char buf[64];
  os << "lattice " << lattice.num_nodes << " " << lattice.arcs.size() << "\n";
  os << "finals";
  for (const auto& [node, weight] : lattice.finals) {
    std::snprintf(buf, sizeof(buf), " %d:%.17g", node, weight);
    os << buf;
  }
  os << "\n";
  for (const LatticeArc& arc : lattice.arcs) {
    std::snprintf(buf, sizeof(buf), "%d\t%d\t%d\t%.17g", arc.from, arc.to,
                  arc.wordpiece, arc.log_weight);
    os << buf << "\n";
  }
  return os.str();
}

void WriteLattice(const Lattice& lattice, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open for write: ", path);
  f << FormatLattice(lattice);
  CASCADE_CHECK_RUNTIME(f.good(), "lattice write failed: ", path);
}

Lattice ReadLattice(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  CASCADE_CHECK_RUNTIME(f.good(), "cannot open: ", path);
  Lattice lattice;
  std::string line;
  int64_t line_no = 0;

  auto fail = [&](const std::string& why) -> void {
    throw RuntimeFailure(StrCat("lattice parse error at ", path, ":",
                                line_no, ": ", why));
  };

  ++line_no;
  CASCADE_CHECK_RUNTIME(static_cast<bool>(std::getline(f, line)),
                        "lattice file is empty: ", path);
  {
    std::istringstream hs(line);
    std::string tag;
    int64_t n_arcs = 0;
    if (!(hs >> tag >> lattice.num_nodes >> n_arcs) || tag != "lattice")
      fail("bad header");
    if (lattice.num_nodes < 1) fail("node count must be >= 1");
  }
  ++line_no;
  if (!std::getline(f, line)) fail("missing finals line");
  {
    std::istringstream fs(line);
    std::string tag;
    if (!(fs >> tag) || tag != "finals") fail("bad finals line");
    std::string entry;
    while (fs >> entry) {
      const size_t colon = entry.find(':');
      if (colon == std::string::npos) fail("bad final entry: " + entry);
      int32_t node = 0;
      double weight = 0.0;
      try {
        node = static_cast<int32_t>(std::stol(entry.substr(0, colon)));
        weight = std::stod(entry.substr(colon + 1));
      } catch (const std::exception&) {
        fail("bad final entry: " + entry);
      }
      if (node < 0 || node >= lattice.num_nodes)
        fail(StrCat("final references unknown node ", node));
      lattice.finals.emplace_back(node, weight);
    }
  }
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream as(line);
    LatticeArc arc;
    if (!(as >> arc.from >> arc.to >> arc.wordpiece >> arc.log_weight))
      fail("bad arc line");
    if (arc.from < 0 || arc.from >= lattice.num_nodes)
      fail(StrCat("arc references unknown node ", arc.from));
    if (arc.to < 0 || arc.to >= lattice.num_nodes)
      fail(StrCat("dangling arc target node ", arc.to));
    lattice.arcs.push_back(arc);
  }
  return lattice;
}

}  // namespace cascade
