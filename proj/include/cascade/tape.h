// include/cascade/tape.h

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

#ifndef CASCADE_TAPE_H_
#define CASCADE_TAPE_H_

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cascade/tensor.h"

namespace cascade {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
struct Var {
  Tape* tape = nullptr;
  int32_t id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode autodiff over a tape of operation records. Nodes are stored
// in creation order, which is a topological order by construction; the
// backward pass walks them in reverse exactly once. Single-threaded per
// instance; independent tapes may live on independent threads. Node values
// are immutable once created.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Leaf(const Tensor& value, bool requires_grad);
  Var Constant(Tensor value);

  // Seeds d(output)/d(output) = seed and accumulates gradients into every
  // node with requires_grad. `output` must be scalar.
  void Backward(Var output, double seed = 1.0);

  const Tensor& Value(Var v) const { return nodes_[v.id].value; }
  const Tensor& Grad(Var v) const;
  // True once Backward has deposited a gradient into this node.
  bool HasGrad(Var v) const { return nodes_[v.id].grad_alloc; }
  bool RequiresGrad(Var v) const { return nodes_[v.id].requires_grad; }
  const std::vector<int32_t>& Parents(Var v) const {
    return nodes_[v.id].parents;
  }

  int64_t NumNodes() const { return static_cast<int64_t>(nodes_.size()); }

  // Internal: used by the op implementations.
  using BackwardFn = std::function<void(Tape&, int32_t self)>;
  Var Emit(Tensor value, std::vector<int32_t> parents, BackwardFn backward);
  Tensor& MutableGrad(int32_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_alloc = false;
    std::vector<int32_t> parents;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
  bool ran_backward_ = false;
};

// ---- primitive operations ----
// All ops require operands to live on the same tape.

Var Add(Var a, Var b);             // same shape
Var Sub(Var a, Var b);             // same shape
Var Mul(Var a, Var b);             // elementwise, same shape
Var Scale(Var a, double c);
Var AddRowVec(Var a, Var b);       // a: [R x C], b: [C], broadcast over rows
Var MulRowVec(Var a, Var b);       // a: [R x C], b: [C]
Var MatMul(Var a, Var b);          // [m x k] * [k x n]
Var Transpose(Var a);              // rank 2
Var SliceCols(Var a, int64_t start, int64_t n);
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
// out[r] = a[r - k] with zero fill; k may be negative (pull from the future).
Var ShiftRows(Var a, int64_t k);
Var Tanh(Var a);
Var Sigmoid(Var a);
Var LogSigmoid(Var a);
Var RowSoftmax(Var a);             // -inf entries give exact 0 probability
Var RowLogSoftmax(Var a);
Var Sum(Var a);                    // scalar
Var Mean(Var a);                   // scalar
Var LogSumExpAll(Var a);           // scalar; exact -inf if all entries -inf
// Fixed (non-differentiated) weights; returns sum_i a[i]*weights[i].
Var WeightedSum(Var a, const Tensor& weights);
// out[r] = a[r, ids[r]].
Var GatherRows(Var a, const std::vector<int32_t>& ids);
// table: [V x D], ids over [0, V) -> [|ids| x D].
Var Embedding(Var table, const std::vector<int32_t>& ids);
Var RepeatRows(Var a, int64_t times);
// a: [T x H], b: [U x H] -> [(T*U) x H], row t*U+u = a[t] + b[u].
Var PairwiseSum(Var a, Var b);
// scores: [T x S]; bias: [2*max_offset+1]; adds bias[clamp(s-t)+max_offset].
Var AddRelPosBias(Var scores, Var bias, int64_t max_offset);
Var LayerNorm(Var a, Var gain, Var bias, double eps = 1e-6);
Var Reshape(Var a, std::vector<int64_t> shape);

// Transducer forward DP in log space. log_blank and log_label are
// [T x (U+1)]; log_label column U is ignored. Returns the negative
// log-likelihood; gradient flows to both inputs via occupancy counts.
Var TransducerNll(Var log_blank, Var log_label, int64_t num_labels);

// ---- plain numeric helpers ----

// log sum_i exp(v[i]) with max subtraction; exact -inf when all -inf.
double LogSumExp(std::span<const double> v);
double LogSumExp2(double a, double b);

// Max over coordinates of |autodiff - central difference| / max(1, |cd|).
// f builds a scalar graph from a leaf of x's shape on the given tape.
double GradCheck(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                 double eps);

}  // namespace cascade

#endif  // CASCADE_TAPE_H_
