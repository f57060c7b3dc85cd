// include/cascade/transducer.h

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

#ifndef CASCADE_TRANSDUCER_H_
#define CASCADE_TRANSDUCER_H_

#include <span>
#include <string>
#include <vector>

#include "cascade/model.h"

namespace cascade {

// Blank-factorized output distribution: p_blank plus (1 - p_blank) times a
// softmax over the non-blank vocabulary (ids 1..V-1 at index id-1).
struct HatDistribution {
  double p_blank = 0.0;
  std::vector<double> p_labels;
};

// Inference-path prediction and joint math on plain arrays; shares the
// parameter store with the tape builders below.
class HatScorer {
 public:
  HatScorer(const ParamStore& params, const std::string& dec_prefix);

  int64_t vocab_size() const { return vocab_size_; }
  int64_t state_dim() const { return state_dim_; }

  // Label-history network: position u state depends only on labels[0..u).
  std::vector<double> StartState() const;
  std::vector<double> NextState(std::span<const double> state,
                                int32_t label) const;

  struct LogScores {
    double log_blank;
    std::vector<double> log_label;  // index v-1 holds label id v
  };
  LogScores Score(std::span<const double> enc_frame,
                  std::span<const double> state) const;
  HatDistribution Distribution(std::span<const double> enc_frame,
                               std::span<const double> state) const;

 private:
  const Tensor *embed_, *wx_, *wr_, *rb_, *h0_;
  const Tensor *we_, *wg_, *jb_, *blank_w_, *blank_b_, *label_w_, *label_b_;
  int64_t vocab_size_;
  int64_t state_dim_;
};

// Prediction states for a label prefix as a [U+1 x decoder_dim] matrix;
// row u is a function of labels[0..u) only. Blank in the prefix is a
// usage error.
Var PredictionStatesVar(ParamVars& pv, const std::string& dec_prefix,
                        std::span<const int32_t> labels);

// Exact log-space transducer negative log-likelihood, differentiable
// through the joint, prediction, and encoder graph.
Var TransducerLossVar(ParamVars& pv, const std::string& dec_prefix, Var enc,
                      std::span<const int32_t> targets,
                      int64_t max_symbols_per_frame);

// Loss value only (builds a private tape).
double TransducerLossValue(const ParamStore& params,
                           const std::string& dec_prefix,
                           const Tensor& enc_frames,
                           std::span<const int32_t> targets,
                           int64_t max_symbols_per_frame);

// Test oracle: explicitly enumerates every alignment (T blank moves and U
// label moves ending in the terminating blank), sums path probabilities in
// linear space, and returns -log of the sum. Instances above the path
// budget are a usage error.
double BruteForceLoss(const ParamStore& params, const std::string& dec_prefix,
                      const Tensor& enc_frames,
                      std::span<const int32_t> targets);

// Number of alignments the oracle enumerates: C(T-1+U, U).
double AlignmentPathCount(int64_t frames, int64_t labels);

}  // namespace cascade

#endif  // CASCADE_TRANSDUCER_H_
