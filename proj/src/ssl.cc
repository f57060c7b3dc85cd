// src/ssl.cc

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

#include "cascade/ssl.h"

#include <atomic>
#include <cmath>

#include "cascade/rng.h"

namespace cascade {

Quantizer InitQuantizer(uint64_t seed, int64_t d_stack, int64_t d_code,
                        int64_t k) {
  CASCADE_CHECK_USAGE(k >= 2 && d_code >= 1 && d_stack >= 1,
                      "InitQuantizer: need K >= 2, d_code >= 1, D_stack >= 1");
  Quantizer q;
  q.seed = seed;
  Rng rng(DeriveSeed(seed, "quantizer-init"));
  q.projection = Tensor({d_stack, d_code});
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(d_code));
  for (int64_t i = 0; i < q.projection.NumElements(); ++i)
    q.projection[i] = proj_std * rng.Gaussian();
  q.codebook = Tensor({k, d_code});
  for (int64_t r = 0; r < k; ++r) {
    double norm_sq = 0.0;
    for (int64_t c = 0; c < d_code; ++c) {
      q.codebook.At(r, c) = rng.Gaussian();
      norm_sq += q.codebook.At(r, c) * q.codebook.At(r, c);
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int64_t c = 0; c < d_code; ++c) q.codebook.At(r, c) *= inv;
  }
  return q;
}

std::vector<int32_t> Quantize(const Quantizer& q, const StackedFeatures& sf) {
  CASCADE_CHECK_USAGE(sf.Dim() == q.projection.Rows(),
                      "Quantize: feature dim ", sf.Dim(),
                      " does not match projection rows ",
                      q.projection.Rows());
  // Probe counter; callers may quantize from worker threads.
  std::atomic_ref<int64_t>(q.quantize_calls).fetch_add(1);
  const int64_t t_len = sf.NumFrames();
  const int64_t d_code = q.projection.Cols();
  const int64_t k = q.codebook.Rows();
  std::vector<int32_t> out(static_cast<size_t>(t_len));
  std::vector<double> v(static_cast<size_t>(d_code));
  for (int64_t t = 0; t < t_len; ++t) {
    double norm_sq = 0.0;
    for (int64_t c = 0; c < d_code; ++c) {
      double acc = 0.0;
      for (int64_t i = 0; i < sf.Dim(); ++i)
        acc += sf.frames.At(t, i) * q.projection.At(i, c);
      v[static_cast<size_t>(c)] = acc;
      norm_sq += acc * acc;
    }
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& x : v) x *= inv;
    }
    int32_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int64_t r = 0; r < k; ++r) {
      double dist = 0.0;
      for (int64_t c = 0; c < d_code; ++c) {
        const double diff = v[static_cast<size_t>(c)] - q.codebook.At(r, c);
        dist += diff * diff;
      }
      if (dist < best_dist) {  // strict: ties keep the lowest index
        best_dist = dist;
        best = static_cast<int32_t>(r);
      }
    }
    out[static_cast<size_t>(t)] = best;
  }
  return out;
}

std::optional<Var> BestRqLoss(Var h, std::span<const int32_t> targets,
                              const MaskInfo& info, Var head_w, Var head_b) {
  Tape& t = *h.tape;
  const int64_t frames = t.Value(h).Rows();
  CASCADE_CHECK_USAGE(
      frames == static_cast<int64_t>(targets.size()) &&
          frames == static_cast<int64_t>(info.flags.size()),
      "BestRqLoss: frame/target/flag length mismatch");
  int64_t n_masked = 0;
  for (bool f : info.flags) n_masked += f ? 1 : 0;
  if (n_masked == 0) return std::nullopt;

  Var logits = AddRowVec(MatMul(h, head_w), head_b);
  Var lsm = RowLogSoftmax(logits);
  Var picked = GatherRows(lsm, std::vector<int32_t>(targets.begin(),
                                                    targets.end()));
  Tensor weights({frames});
  for (int64_t i = 0; i < frames; ++i)
    weights[i] = info.flags[static_cast<size_t>(i)]
                     ? -1.0 / static_cast<double>(n_masked)
                     : 0.0;
  return WeightedSum(picked, weights);
}

}  // namespace cascade
