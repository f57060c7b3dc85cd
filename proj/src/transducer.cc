// src/transducer.cc

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

#include "cascade/transducer.h"

#include <cmath>

#include "cascade/wordpiece.h"

namespace cascade {

namespace {

double StableLogSigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

void CheckNoBlank(std::span<const int32_t> labels) {
  for (int32_t v : labels)
    CASCADE_CHECK_USAGE(v != WordpieceModel::kBlankId,
                        "label sequence contains the blank symbol");
}

}  // namespace

HatScorer::HatScorer(const ParamStore& params, const std::string& dec_prefix)
    : embed_(&params.Get(dec_prefix + "embed")),
      wx_(&params.Get(dec_prefix + "rnn.wx")),
      wr_(&params.Get(dec_prefix + "rnn.wr")),
      rb_(&params.Get(dec_prefix + "rnn.b")),
      h0_(&params.Get(dec_prefix + "rnn.h0")),
      we_(&params.Get(dec_prefix + "joint.we")),
      wg_(&params.Get(dec_prefix + "joint.wg")),
      jb_(&params.Get(dec_prefix + "joint.b")),
      blank_w_(&params.Get(dec_prefix + "joint.blank.w")),
      blank_b_(&params.Get(dec_prefix + "joint.blank.b")),
      label_w_(&params.Get(dec_prefix + "joint.label.w")),
      label_b_(&params.Get(dec_prefix + "joint.label.b")) {
  vocab_size_ = embed_->Rows();
  state_dim_ = embed_->Cols();
}

std::vector<double> HatScorer::StartState() const {
  return h0_->data();
}

std::vector<double> HatScorer::NextState(std::span<const double> state,
                                         int32_t label) const {
  CASCADE_CHECK_USAGE(label != WordpieceModel::kBlankId,
                      "NextState: blank is not a label");
  CASCADE_CHECK_USAGE(label >= 0 && label < vocab_size_,
                      "NextState: label out of range: ", label);
  const int64_t d = state_dim_;
  std::vector<double> next(static_cast<size_t>(d));
  for (int64_t j = 0; j < d; ++j) {
    double acc = (*rb_)[j];
    for (int64_t i = 0; i < d; ++i) {
      acc += embed_->At(label, i) * wx_->At(i, j);
      acc += state[static_cast<size_t>(i)] * wr_->At(i, j);
    }
    next[static_cast<size_t>(j)] = std::tanh(acc);
  }
  return next;
}

HatScorer::LogScores HatScorer::Score(std::span<const double> enc_frame,
                                      std::span<const double> state) const {
  const int64_t j_dim = jb_->NumElements();
  const int64_t e_dim = we_->Rows();
  const int64_t d = state_dim_;
  CASCADE_CHECK_USAGE(static_cast<int64_t>(enc_frame.size()) == e_dim &&
                          static_cast<int64_t>(state.size()) == d,
                      "Score: dimension mismatch");
  std::vector<double> z(static_cast<size_t>(j_dim));
  for (int64_t j = 0; j < j_dim; ++j) {
    double acc = (*jb_)[j];
    for (int64_t i = 0; i < e_dim; ++i)
      acc += enc_frame[static_cast<size_t>(i)] * we_->At(i, j);
    for (int64_t i = 0; i < d; ++i)
      acc += state[static_cast<size_t>(i)] * wg_->At(i, j);
    z[static_cast<size_t>(j)] = std::tanh(acc);
  }
  double blank_logit = (*blank_b_)[0];
  for (int64_t j = 0; j < j_dim; ++j)
    blank_logit += z[static_cast<size_t>(j)] * blank_w_->At(j, 0);

  const int64_t n_labels = label_b_->NumElements();
  std::vector<double> logits(static_cast<size_t>(n_labels));
  for (int64_t v = 0; v < n_labels; ++v) {
    double acc = (*label_b_)[v];
    for (int64_t j = 0; j < j_dim; ++j)
      acc += z[static_cast<size_t>(j)] * label_w_->At(j, v);
    logits[static_cast<size_t>(v)] = acc;
  }
  const double lse = LogSumExp(logits);

  LogScores out;
  out.log_blank = StableLogSigmoid(blank_logit);
  const double log_not_blank = StableLogSigmoid(-blank_logit);
  out.log_label.resize(static_cast<size_t>(n_labels));
  for (int64_t v = 0; v < n_labels; ++v)
    out.log_label[static_cast<size_t>(v)] =
        log_not_blank + logits[static_cast<size_t>(v)] - lse;
  return out;
}

HatDistribution HatScorer::Distribution(std::span<const double> enc_frame,
                                        std::span<const double> state) const {
  LogScores ls = Score(enc_frame, state);
  HatDistribution d;
  d.p_blank = std::exp(ls.log_blank);
  d.p_labels.resize(ls.log_label.size());
  for (size_t i = 0; i < ls.log_label.size(); ++i)
    d.p_labels[i] = std::exp(ls.log_label[i]);
  return d;
}

Var PredictionStatesVar(ParamVars& pv, const std::string& dec_prefix,
                        std::span<const int32_t> labels) {
  CheckNoBlank(labels);
  Tape& t = pv.tape();
  Var wx = pv[dec_prefix + "rnn.wx"];
  Var wr = pv[dec_prefix + "rnn.wr"];
  Var b = pv[dec_prefix + "rnn.b"];
  Var embed = pv[dec_prefix + "embed"];
  std::vector<Var> states;
  states.push_back(pv[dec_prefix + "rnn.h0"]);
  for (int32_t label : labels) {
    Var e = Embedding(embed, {label});
    Var pre = AddRowVec(Add(MatMul(e, wx), MatMul(states.back(), wr)), b);
    states.push_back(Tanh(pre));
  }
  (void)t;
  return ConcatRows(states);
}

namespace {

// Shared grid construction: log_blank and log_label-of-target matrices,
// both [T x (U+1)]; log_label column U is a dummy.
struct JointGrid {
  Var log_blank;
  Var log_label;
};

JointGrid BuildJointGrid(ParamVars& pv, const std::string& dec_prefix,
                         Var enc, Var pred_states,
                         std::span<const int32_t> targets) {
  Tape& t = pv.tape();
  const int64_t frames = t.Value(enc).Rows();
  const int64_t u1 = t.Value(pred_states).Rows();  // U + 1

  Var enc_proj = MatMul(enc, pv[dec_prefix + "joint.we"]);
  Var pred_proj = MatMul(pred_states, pv[dec_prefix + "joint.wg"]);
  Var z = Tanh(AddRowVec(PairwiseSum(enc_proj, pred_proj),
                         pv[dec_prefix + "joint.b"]));

  Var blank_logits = Reshape(
      AddRowVec(MatMul(z, pv[dec_prefix + "joint.blank.w"]),
                pv[dec_prefix + "joint.blank.b"]),
      {frames * u1});
  Var log_blank = Reshape(LogSigmoid(blank_logits), {frames, u1});

  Var label_logits = AddRowVec(MatMul(z, pv[dec_prefix + "joint.label.w"]),
                               pv[dec_prefix + "joint.label.b"]);
  Var lsm = RowLogSoftmax(label_logits);
  std::vector<int32_t> pick(static_cast<size_t>(frames * u1), 0);
  for (int64_t f = 0; f < frames; ++f)
    for (int64_t u = 0; u + 1 < u1; ++u)
      pick[static_cast<size_t>(f * u1 + u)] =
          targets[static_cast<size_t>(u)] - 1;  // label head skips blank
  Var picked = GatherRows(lsm, pick);
  Var log_not_blank = Reshape(LogSigmoid(Scale(blank_logits, -1.0)),
                              {frames * u1});
  Var log_label = Reshape(Add(log_not_blank, picked), {frames, u1});
  return {log_blank, log_label};
}

}  // namespace

Var TransducerLossVar(ParamVars& pv, const std::string& dec_prefix, Var enc,
                      std::span<const int32_t> targets,
                      int64_t max_symbols_per_frame) {
  CheckNoBlank(targets);
  Tape& t = pv.tape();
  const int64_t frames = t.Value(enc).Rows();
  const int64_t num_labels = static_cast<int64_t>(targets.size());
  CASCADE_CHECK_USAGE(frames >= 1, "TransducerLossVar: empty encoder output");
  CASCADE_CHECK_USAGE(num_labels <= max_symbols_per_frame * frames,
                      "TransducerLossVar: target length ", num_labels,
                      " exceeds max_symbols_per_frame * frames = ",
                      max_symbols_per_frame * frames);
  Var states = PredictionStatesVar(pv, dec_prefix, targets);
  JointGrid grid = BuildJointGrid(pv, dec_prefix, enc, states, targets);
  return TransducerNll(grid.log_blank, grid.log_label, num_labels);
}

double TransducerLossValue(const ParamStore& params,
                           const std::string& dec_prefix,
                           const Tensor& enc_frames,
                           std::span<const int32_t> targets,
                           int64_t max_symbols_per_frame) {
  Tape tape;
  ParamVars pv(&tape, &params, /*trainable=*/false);
  Var enc = tape.Leaf(enc_frames, false);
  Var loss =
      TransducerLossVar(pv, dec_prefix, enc, targets, max_symbols_per_frame);
  return tape.Value(loss)[0];
}

double AlignmentPathCount(int64_t frames, int64_t labels) {
  // C(frames - 1 + labels, labels)
  double c = 1.0;
  for (int64_t i = 1; i <= labels; ++i)
    c *= static_cast<double>(frames - 1 + i) / static_cast<double>(i);
  return c;
}

double BruteForceLoss(const ParamStore& params, const std::string& dec_prefix,
                      const Tensor& enc_frames,
                      std::span<const int32_t> targets) {
  CheckNoBlank(targets);
  const int64_t frames = enc_frames.Rows();
  const int64_t num_labels = static_cast<int64_t>(targets.size());
  CASCADE_CHECK_USAGE(frames >= 1, "BruteForceLoss: empty encoder output");
  CASCADE_CHECK_USAGE(AlignmentPathCount(frames, num_labels) <= 1e6,
                      "BruteForceLoss: instance too large to enumerate");

  HatScorer scorer(params, dec_prefix);
  // Prediction states for every prefix length.
  std::vector<std::vector<double>> states;
  states.push_back(scorer.StartState());
  for (int32_t v : targets) states.push_back(scorer.NextState(states.back(), v));

  // Linear-space blank and target-label probabilities per grid point.
  std::vector<std::vector<double>> p_blank(
      static_cast<size_t>(frames),
      std::vector<double>(static_cast<size_t>(num_labels + 1)));
  std::vector<std::vector<double>> p_label = p_blank;
  for (int64_t f = 0; f < frames; ++f) {
    std::vector<double> enc_row(enc_frames.data().begin() + f * enc_frames.Cols(),
                                enc_frames.data().begin() +
                                    (f + 1) * enc_frames.Cols());
    for (int64_t u = 0; u <= num_labels; ++u) {
      HatDistribution d = scorer.Distribution(enc_row, states[u]);
      p_blank[f][u] = d.p_blank;
      if (u < num_labels)
        p_label[f][u] = d.p_labels[static_cast<size_t>(targets[u] - 1)];
    }
  }

  // Every alignment interleaves frame-consuming blanks with label moves and
  // terminates with the blank at (T-1, U).
  double total = 0.0;
  auto walk = [&](auto&& self, int64_t f, int64_t u, double p) -> void {
    if (f == frames - 1 && u == num_labels) {
      total += p * p_blank[f][u];
      return;
    }
    if (u < num_labels) self(self, f, u + 1, p * p_label[f][u]);
    if (f < frames - 1) self(self, f + 1, u, p * p_blank[f][u]);
  };
  walk(walk, 0, 0, 1.0);
  return -std::log(total);
}

}  // namespace cascade
