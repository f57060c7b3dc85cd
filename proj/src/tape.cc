// src/tape.cc

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

#include "cascade/tape.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cascade {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// c[m x n] += a[m x k] * b[k x n]
void MatMulAcc(const double* a, const double* b, double* c, int64_t m,
               int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (int64_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      if (aip == 0.0) continue;
      const double* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

// da[m x k] += g[m x n] * b^T  (b is [k x n])
void MatMulAccNT(const double* g, const double* b, double* da, int64_t m,
                 int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    double* darow = da + i * k;
    for (int64_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      darow[p] += acc;
    }
  }
}

// db[k x n] += a^T * g  (a is [m x k], g is [m x n])
void MatMulAccTN(const double* a, const double* g, double* db, int64_t m,
                 int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* grow = g + i * n;
    for (int64_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      if (aip == 0.0) continue;
      double* dbrow = db + p * n;
      for (int64_t j = 0; j < n; ++j) dbrow[j] += aip * grow[j];
    }
  }
}

void CheckSameTape(Var a, Var b) {
  CASCADE_CHECK_USAGE(a.tape == b.tape && a.tape != nullptr,
                      "operands must live on the same tape");
}

}  // namespace

double LogSumExp2(double a, double b) {
  if (a == kNegInf && b == kNegInf) return kNegInf;
  double m = std::max(a, b);
  double d = std::min(a, b) - m;
  return m + std::log1p(std::exp(d));
}

double LogSumExp(std::span<const double> v) {
  CASCADE_CHECK_USAGE(!v.empty(), "logsumexp of empty vector");
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// ---------------------------------------------------------------------------
// Tape core

Var Tape::Emit(Tensor value, std::vector<int32_t> parents,
               BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.parents = std::move(parents);
  for (int32_t p : node.parents) {
    if (nodes_[p].requires_grad) node.requires_grad = true;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::Leaf(const Tensor& value, bool requires_grad) {
  Node node;
  node.value = value;
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::Constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Tensor& Tape::MutableGrad(int32_t id) {
  Node& n = nodes_[id];
  if (!n.grad_alloc) {
    n.grad = Tensor::Zeros(n.value.shape());
    n.grad_alloc = true;
  }
  return n.grad;
}

const Tensor& Tape::Grad(Var v) const {
  const Node& n = nodes_[v.id];
  CASCADE_CHECK_USAGE(n.grad_alloc,
                      "Grad() before Backward(), or node has no gradient");
  return n.grad;
}

void Tape::Backward(Var output, double seed) {
  CASCADE_CHECK_USAGE(output.tape == this, "output is not on this tape");
  CASCADE_CHECK_USAGE(nodes_[output.id].value.NumElements() == 1,
                      "Backward() requires a scalar output node");
  CASCADE_CHECK_USAGE(!ran_backward_, "Backward() already ran on this tape");
  ran_backward_ = true;
  MutableGrad(output.id)[0] = seed;
  for (int32_t i = output.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward && n.grad_alloc) n.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// Elementwise and shape ops

Var Add(Var a, Var b) {
  CheckSameTape(a, b);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vb = t.Value(b);
  CASCADE_CHECK_USAGE(va.SameShape(vb), "Add: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.NumElements(); ++i) out[i] += vb[i];
  int32_t ia = a.id, ib = b.id;
  return t.Emit(std::move(out), {ia, ib}, [ia, ib](Tape& t, int32_t self) {
    const Tensor& g = t.Grad(Var{&t, self});
    if (t.RequiresGrad(Var{&t, ia})) {
      Tensor& da = t.MutableGrad(ia);
      for (int64_t i = 0; i < g.NumElements(); ++i) da[i] += g[i];
    }
    if (t.RequiresGrad(Var{&t, ib})) {
      Tensor& db = t.MutableGrad(ib);
      for (int64_t i = 0; i < g.NumElements(); ++i) db[i] += g[i];
    }
  });
}

Var Sub(Var a, Var b) {
  CheckSameTape(a, b);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vb = t.Value(b);
  CASCADE_CHECK_USAGE(va.SameShape(vb), "Sub: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.NumElements(); ++i) out[i] -= vb[i];
  int32_t ia = a.id, ib = b.id;
  return t.Emit(std::move(out), {ia, ib}, [ia, ib](Tape& t, int32_t self) {
    const Tensor& g = t.Grad(Var{&t, self});
    if (t.RequiresGrad(Var{&t, ia})) {
      Tensor& da = t.MutableGrad(ia);
      for (int64_t i = 0; i < g.NumElements(); ++i) da[i] += g[i];
    }
    if (t.RequiresGrad(Var{&t, ib})) {
      Tensor& db = t.MutableGrad(ib);
      for (int64_t i = 0; i < g.NumElements(); ++i) db[i] -= g[i];
    }
  });
}

Var Mul(Var a, Var b) {
  CheckSameTape(a, b);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vb = t.Value(b);
  CASCADE_CHECK_USAGE(va.SameShape(vb), "Mul: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.NumElements(); ++i) out[i] *= vb[i];
  int32_t ia = a.id, ib = b.id;
  return t.Emit(std::move(out), {ia, ib}, [ia, ib](Tape& t, int32_t self) {
    const Tensor& g = t.Grad(Var{&t, self});
    const Tensor& va = t.Value(Var{&t, ia});
    const Tensor& vb = t.Value(Var{&t, ib});
    if (t.RequiresGrad(Var{&t, ia})) {
      Tensor& da = t.MutableGrad(ia);
      for (int64_t i = 0; i < g.NumElements(); ++i) da[i] += g[i] * vb[i];
    }
    if (t.RequiresGrad(Var{&t, ib})) {
      Tensor& db = t.MutableGrad(ib);
      for (int64_t i = 0; i < g.NumElements(); ++i) db[i] += g[i] * va[i];
    }
  });
}

Var Scale(Var a, double c) {
  Tape& t = *a.tape;
  Tensor out = t.Value(a);
  for (int64_t i = 0; i < out.NumElements(); ++i) out[i] *= c;
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia}, [ia, c](Tape& t, int32_t self) {
    const Tensor& g = t.Grad(Var{&t, self});
    Tensor& da = t.MutableGrad(ia);
    for (int64_t i = 0; i < g.NumElements(); ++i) da[i] += c * g[i];
  });
}

Var AddRowVec(Var a, Var b) {
  CheckSameTape(a, b);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vb = t.Value(b);
  CASCADE_CHECK_USAGE(va.Rank() == 2 && vb.Rank() == 1 &&
                          vb.shape()[0] == va.Cols(),
                      "AddRowVec: expected [RxC] and [C]");
  Tensor out = va;
  const int64_t rows = va.Rows(), cols = va.Cols();
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) out[r * cols + c] += vb[c];
  int32_t ia = a.id, ib = b.id;
  return t.Emit(std::move(out), {ia, ib},
                [ia, ib, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  if (t.RequiresGrad(Var{&t, ia})) {
                    Tensor& da = t.MutableGrad(ia);
                    for (int64_t i = 0; i < g.NumElements(); ++i)
                      da[i] += g[i];
                  }
                  if (t.RequiresGrad(Var{&t, ib})) {
                    Tensor& db = t.MutableGrad(ib);
                    for (int64_t r = 0; r < rows; ++r)
                      for (int64_t c = 0; c < cols; ++c)
                        db[c] += g[r * cols + c];
                  }
                });
}

Var MulRowVec(Var a, Var b) {
  CheckSameTape(a, b);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vb = t.Value(b);
  CASCADE_CHECK_USAGE(va.Rank() == 2 && vb.Rank() == 1 &&
                          vb.shape()[0] == va.Cols(),
                      "MulRowVec: expected [RxC] and [C]");
  Tensor out = va;
  const int64_t rows = va.Rows(), cols = va.Cols();
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) out[r * cols + c] *= vb[c];
  int32_t ia = a.id, ib = b.id;
  return t.Emit(std::move(out), {ia, ib},
                [ia, ib, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  const Tensor& va = t.Value(Var{&t, ia});
                  const Tensor& vb = t.Value(Var{&t, ib});
                  if (t.RequiresGrad(Var{&t, ia})) {
                    Tensor& da = t.MutableGrad(ia);
                    for (int64_t r = 0; r < rows; ++r)
                      for (int64_t c = 0; c < cols; ++c)
                        da[r * cols + c] += g[r * cols + c] * vb[c];
                  }
                  if (t.RequiresGrad(Var{&t, ib})) {
                    Tensor& db = t.MutableGrad(ib);
                    for (int64_t r = 0; r < rows; ++r)
                      for (int64_t c = 0; c < cols; ++c)
                        db[c] += g[r * cols + c] * va[r * cols + c];
                  }
                });
}

Var MatMul(Var a, Var b) {
  CheckSameTape(a, b);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vb = t.Value(b);
  CASCADE_CHECK_USAGE(va.Rank() == 2 && vb.Rank() == 2 &&
                          va.Cols() == vb.Rows(),
                      "MatMul: dimension mismatch");
  const int64_t m = va.Rows(), k = va.Cols(), n = vb.Cols();
  Tensor out({m, n});
  MatMulAcc(va.data().data(), vb.data().data(), out.data().data(), m, k, n);
  int32_t ia = a.id, ib = b.id;
  return t.Emit(std::move(out), {ia, ib},
                [ia, ib, m, k, n](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  const Tensor& va = t.Value(Var{&t, ia});
                  const Tensor& vb = t.Value(Var{&t, ib});
                  if (t.RequiresGrad(Var{&t, ia})) {
                    Tensor& da = t.MutableGrad(ia);
                    MatMulAccNT(g.data().data(), vb.data().data(),
                                da.data().data(), m, k, n);
                  }
                  if (t.RequiresGrad(Var{&t, ib})) {
                    Tensor& db = t.MutableGrad(ib);
                    MatMulAccTN(va.data().data(), g.data().data(),
                                db.data().data(), m, k, n);
                  }
                });
}

Var Transpose(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.Rank() == 2, "Transpose: rank-2 only");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({cols, rows});
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) out[c * rows + r] = va[r * cols + c];
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia},
                [ia, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < cols; ++c)
                      da[r * cols + c] += g[c * rows + r];
                });
}

Var SliceCols(Var a, int64_t start, int64_t n) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.Rank() == 2 && start >= 0 && n >= 1 &&
                          start + n <= va.Cols(),
                      "SliceCols: range out of bounds");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({rows, n});
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < n; ++c)
      out[r * n + c] = va[r * cols + start + c];
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia},
                [ia, start, n, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < n; ++c)
                      da[r * cols + start + c] += g[r * n + c];
                });
}

Var ConcatCols(std::span<const Var> parts) {
  CASCADE_CHECK_USAGE(!parts.empty(), "ConcatCols: empty input");
  Tape& t = *parts[0].tape;
  const int64_t rows = t.Value(parts[0]).Rows();
  int64_t total = 0;
  std::vector<int32_t> ids;
  std::vector<int64_t> widths;
  for (Var p : parts) {
    CheckSameTape(parts[0], p);
    const Tensor& v = t.Value(p);
    CASCADE_CHECK_USAGE(v.Rank() == 2 && v.Rows() == rows,
                        "ConcatCols: row mismatch");
    ids.push_back(p.id);
    widths.push_back(v.Cols());
    total += v.Cols();
  }
  Tensor out({rows, total});
  int64_t off = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    const Tensor& v = t.Value(Var{&t, ids[i]});
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t c = 0; c < widths[i]; ++c)
        out[r * total + off + c] = v[r * widths[i] + c];
    off += widths[i];
  }
  return t.Emit(std::move(out), ids,
                [ids, widths, rows, total](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  int64_t off = 0;
                  for (size_t i = 0; i < ids.size(); ++i) {
                    if (t.RequiresGrad(Var{&t, ids[i]})) {
                      Tensor& d = t.MutableGrad(ids[i]);
                      for (int64_t r = 0; r < rows; ++r)
                        for (int64_t c = 0; c < widths[i]; ++c)
                          d[r * widths[i] + c] += g[r * total + off + c];
                    }
                    off += widths[i];
                  }
                });
}

Var ConcatRows(std::span<const Var> parts) {
  CASCADE_CHECK_USAGE(!parts.empty(), "ConcatRows: empty input");
  Tape& t = *parts[0].tape;
  const int64_t cols = t.Value(parts[0]).Cols();
  int64_t total = 0;
  std::vector<int32_t> ids;
  std::vector<int64_t> heights;
  for (Var p : parts) {
    CheckSameTape(parts[0], p);
    const Tensor& v = t.Value(p);
    CASCADE_CHECK_USAGE(v.Rank() == 2 && v.Cols() == cols,
                        "ConcatRows: column mismatch");
    ids.push_back(p.id);
    heights.push_back(v.Rows());
    total += v.Rows();
  }
  Tensor out({total, cols});
  int64_t off = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    const Tensor& v = t.Value(Var{&t, ids[i]});
    std::copy(v.data().begin(), v.data().end(),
              out.data().begin() + off * cols);
    off += heights[i];
  }
  return t.Emit(std::move(out), ids,
                [ids, heights, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  int64_t off = 0;
                  for (size_t i = 0; i < ids.size(); ++i) {
                    if (t.RequiresGrad(Var{&t, ids[i]})) {
                      Tensor& d = t.MutableGrad(ids[i]);
                      for (int64_t j = 0; j < heights[i] * cols; ++j)
                        d[j] += g[off * cols + j];
                    }
                    off += heights[i];
                  }
                });
}

Var ShiftRows(Var a, int64_t k) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.Rank() == 2, "ShiftRows: rank-2 only");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({rows, cols});
  for (int64_t r = 0; r < rows; ++r) {
    int64_t src = r - k;
    if (src < 0 || src >= rows) continue;
    for (int64_t c = 0; c < cols; ++c)
      out[r * cols + c] = va[src * cols + c];
  }
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia},
                [ia, k, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t r = 0; r < rows; ++r) {
                    int64_t src = r - k;
                    if (src < 0 || src >= rows) continue;
                    for (int64_t c = 0; c < cols; ++c)
                      da[src * cols + c] += g[r * cols + c];
                  }
                });
}

namespace {
template <typename FwdFn, typename DerivFromY>
Var UnaryOp(Var a, FwdFn fwd, DerivFromY dy, const char* /*name*/) {
  Tape& t = *a.tape;
  Tensor out = t.Value(a);
  for (int64_t i = 0; i < out.NumElements(); ++i) out[i] = fwd(out[i]);
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia}, [ia, dy](Tape& t, int32_t self) {
    const Tensor& g = t.Grad(Var{&t, self});
    const Tensor& y = t.Value(Var{&t, self});
    const Tensor& x = t.Value(Var{&t, ia});
    Tensor& da = t.MutableGrad(ia);
    for (int64_t i = 0; i < g.NumElements(); ++i)
      da[i] += g[i] * dy(x[i], y[i]);
  });
}
}  // namespace

Var Tanh(Var a) {
  return UnaryOp(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; }, "Tanh");
}

Var Sigmoid(Var a) {
  return UnaryOp(
      a,
      [](double x) {
        return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
      },
      [](double, double y) { return y * (1.0 - y); }, "Sigmoid");
}

Var LogSigmoid(Var a) {
  return UnaryOp(
      a,
      [](double x) {
        return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
      },
      [](double x, double) {
        // d/dx log sigmoid(x) = sigmoid(-x)
        return x >= 0 ? std::exp(-x) / (1.0 + std::exp(-x))
                      : 1.0 / (1.0 + std::exp(x));
      },
      "LogSigmoid");
}

Var RowSoftmax(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.Rank() == 2, "RowSoftmax: rank-2 only");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({rows, cols});
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = va.data().data() + r * cols;
    double* y = out.data().data() + r * cols;
    double m = kNegInf;
    for (int64_t c = 0; c < cols; ++c) m = std::max(m, x[c]);
    if (m == kNegInf) continue;  // fully masked row stays zero
    double s = 0.0;
    for (int64_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - m);
      s += y[c];
    }
    for (int64_t c = 0; c < cols; ++c) y[c] /= s;
  }
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia},
                [ia, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  const Tensor& y = t.Value(Var{&t, self});
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t r = 0; r < rows; ++r) {
                    const double* gr = g.data().data() + r * cols;
                    const double* yr = y.data().data() + r * cols;
                    double dot = 0.0;
                    for (int64_t c = 0; c < cols; ++c) dot += gr[c] * yr[c];
                    for (int64_t c = 0; c < cols; ++c)
                      da[r * cols + c] += yr[c] * (gr[c] - dot);
                  }
                });
}

Var RowLogSoftmax(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.Rank() == 2, "RowLogSoftmax: rank-2 only");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({rows, cols});
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = va.data().data() + r * cols;
    double lse = LogSumExp(std::span<const double>(x, cols));
    for (int64_t c = 0; c < cols; ++c) out[r * cols + c] = x[c] - lse;
  }
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia},
                [ia, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  const Tensor& y = t.Value(Var{&t, self});
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t r = 0; r < rows; ++r) {
                    const double* gr = g.data().data() + r * cols;
                    const double* yr = y.data().data() + r * cols;
                    double gsum = 0.0;
                    for (int64_t c = 0; c < cols; ++c) gsum += gr[c];
                    for (int64_t c = 0; c < cols; ++c)
                      da[r * cols + c] += gr[c] - std::exp(yr[c]) * gsum;
                  }
                });
}

Var Sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  double s = 0.0;
  for (int64_t i = 0; i < va.NumElements(); ++i) s += va[i];
  int32_t ia = a.id;
  return t.Emit(Tensor::Scalar(s), {ia}, [ia](Tape& t, int32_t self) {
    const double g = t.Grad(Var{&t, self})[0];
    Tensor& da = t.MutableGrad(ia);
    for (int64_t i = 0; i < da.NumElements(); ++i) da[i] += g;
  });
}

Var Mean(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.NumElements() > 0, "Mean: empty tensor");
  const double inv = 1.0 / static_cast<double>(va.NumElements());
  double s = 0.0;
  for (int64_t i = 0; i < va.NumElements(); ++i) s += va[i];
  int32_t ia = a.id;
  return t.Emit(Tensor::Scalar(s * inv), {ia},
                [ia, inv](Tape& t, int32_t self) {
                  const double g = t.Grad(Var{&t, self})[0];
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t i = 0; i < da.NumElements(); ++i)
                    da[i] += g * inv;
                });
}

Var LogSumExpAll(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.NumElements() > 0, "LogSumExpAll: empty tensor");
  double lse =
      LogSumExp(std::span<const double>(va.data().data(), va.data().size()));
  int32_t ia = a.id;
  return t.Emit(Tensor::Scalar(lse), {ia}, [ia](Tape& t, int32_t self) {
    const double g = t.Grad(Var{&t, self})[0];
    const double y = t.Value(Var{&t, self})[0];
    const Tensor& x = t.Value(Var{&t, ia});
    Tensor& da = t.MutableGrad(ia);
    if (y == kNegInf) return;
    for (int64_t i = 0; i < x.NumElements(); ++i)
      da[i] += g * std::exp(x[i] - y);
  });
}

Var WeightedSum(Var a, const Tensor& weights) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.NumElements() == weights.NumElements(),
                      "WeightedSum: size mismatch");
  double s = 0.0;
  for (int64_t i = 0; i < va.NumElements(); ++i) s += va[i] * weights[i];
  int32_t ia = a.id;
  Tensor w = weights;
  return t.Emit(Tensor::Scalar(s), {ia},
                [ia, w = std::move(w)](Tape& t, int32_t self) {
                  const double g = t.Grad(Var{&t, self})[0];
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t i = 0; i < da.NumElements(); ++i)
                    da[i] += g * w[i];
                });
}

Var GatherRows(Var a, const std::vector<int32_t>& ids) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.Rank() == 2 &&
                          static_cast<int64_t>(ids.size()) == va.Rows(),
                      "GatherRows: need one column id per row");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({rows});
  for (int64_t r = 0; r < rows; ++r) {
    CASCADE_CHECK_USAGE(ids[r] >= 0 && ids[r] < cols,
                        "GatherRows: column id out of range");
    out[r] = va[r * cols + ids[r]];
  }
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia},
                [ia, ids, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  Tensor& da = t.MutableGrad(ia);
                  for (size_t r = 0; r < ids.size(); ++r)
                    da[static_cast<int64_t>(r) * cols + ids[r]] += g[r];
                });
}

Var Embedding(Var table, const std::vector<int32_t>& ids) {
  Tape& t = *table.tape;
  const Tensor& vt = t.Value(table);
  CASCADE_CHECK_USAGE(vt.Rank() == 2, "Embedding: table must be [V x D]");
  const int64_t v = vt.Rows(), d = vt.Cols();
  const int64_t n = static_cast<int64_t>(ids.size());
  Tensor out({n, d});
  for (int64_t i = 0; i < n; ++i) {
    CASCADE_CHECK_USAGE(ids[i] >= 0 && ids[i] < v,
                        "Embedding: id out of range: ", ids[i]);
    for (int64_t c = 0; c < d; ++c) out[i * d + c] = vt[ids[i] * d + c];
  }
  int32_t it = table.id;
  return t.Emit(std::move(out), {it}, [it, ids, d](Tape& t, int32_t self) {
    const Tensor& g = t.Grad(Var{&t, self});
    Tensor& dt = t.MutableGrad(it);
    for (size_t i = 0; i < ids.size(); ++i)
      for (int64_t c = 0; c < d; ++c)
        dt[ids[i] * d + c] += g[static_cast<int64_t>(i) * d + c];
  });
}

Var RepeatRows(Var a, int64_t times) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  CASCADE_CHECK_USAGE(va.Rank() == 2 && times >= 1,
                      "RepeatRows: rank-2 input, times >= 1");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({rows * times, cols});
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t j = 0; j < times; ++j)
      for (int64_t c = 0; c < cols; ++c)
        out[(r * times + j) * cols + c] = va[r * cols + c];
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia},
                [ia, times, rows, cols](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  Tensor& da = t.MutableGrad(ia);
                  for (int64_t r = 0; r < rows; ++r)
                    for (int64_t j = 0; j < times; ++j)
                      for (int64_t c = 0; c < cols; ++c)
                        da[r * cols + c] += g[(r * times + j) * cols + c];
                });
}

Var PairwiseSum(Var a, Var b) {
  CheckSameTape(a, b);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vb = t.Value(b);
  CASCADE_CHECK_USAGE(va.Rank() == 2 && vb.Rank() == 2 &&
                          va.Cols() == vb.Cols(),
                      "PairwiseSum: need [TxH] and [UxH]");
  const int64_t tt = va.Rows(), uu = vb.Rows(), h = va.Cols();
  Tensor out({tt * uu, h});
  for (int64_t i = 0; i < tt; ++i)
    for (int64_t j = 0; j < uu; ++j)
      for (int64_t c = 0; c < h; ++c)
        out[(i * uu + j) * h + c] = va[i * h + c] + vb[j * h + c];
  int32_t ia = a.id, ib = b.id;
  return t.Emit(std::move(out), {ia, ib},
                [ia, ib, tt, uu, h](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  if (t.RequiresGrad(Var{&t, ia})) {
                    Tensor& da = t.MutableGrad(ia);
                    for (int64_t i = 0; i < tt; ++i)
                      for (int64_t j = 0; j < uu; ++j)
                        for (int64_t c = 0; c < h; ++c)
                          da[i * h + c] += g[(i * uu + j) * h + c];
                  }
                  if (t.RequiresGrad(Var{&t, ib})) {
                    Tensor& db = t.MutableGrad(ib);
                    for (int64_t i = 0; i < tt; ++i)
                      for (int64_t j = 0; j < uu; ++j)
                        for (int64_t c = 0; c < h; ++c)
                          db[j * h + c] += g[(i * uu + j) * h + c];
                  }
                });
}

Var AddRelPosBias(Var scores, Var bias, int64_t max_offset) {
  CheckSameTape(scores, bias);
  Tape& t = *scores.tape;
  const Tensor& vs = t.Value(scores);
  const Tensor& vb = t.Value(bias);
  CASCADE_CHECK_USAGE(vs.Rank() == 2 && vb.Rank() == 1 &&
                          vb.shape()[0] == 2 * max_offset + 1,
                      "AddRelPosBias: bias must have 2*max_offset+1 entries");
  const int64_t rows = vs.Rows(), cols = vs.Cols();
  Tensor out = vs;
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) {
      int64_t off = std::clamp(c - r, -max_offset, max_offset);
      out[r * cols + c] += vb[off + max_offset];
    }
  int32_t is = scores.id, ib = bias.id;
  return t.Emit(std::move(out), {is, ib},
                [is, ib, rows, cols, max_offset](Tape& t, int32_t self) {
                  const Tensor& g = t.Grad(Var{&t, self});
                  if (t.RequiresGrad(Var{&t, is})) {
                    Tensor& ds = t.MutableGrad(is);
                    for (int64_t i = 0; i < g.NumElements(); ++i)
                      ds[i] += g[i];
                  }
                  if (t.RequiresGrad(Var{&t, ib})) {
                    Tensor& db = t.MutableGrad(ib);
                    for (int64_t r = 0; r < rows; ++r)
                      for (int64_t c = 0; c < cols; ++c) {
                        int64_t off = std::clamp(c - r, -max_offset,
                                                 max_offset);
                        db[off + max_offset] += g[r * cols + c];
                      }
                  }
                });
}

Var LayerNorm(Var a, Var gain, Var bias, double eps) {
  CheckSameTape(a, gain);
  CheckSameTape(a, bias);
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  const Tensor& vg = t.Value(gain);
  const Tensor& vb = t.Value(bias);
  CASCADE_CHECK_USAGE(va.Rank() == 2 && vg.Rank() == 1 && vb.Rank() == 1 &&
                          vg.shape()[0] == va.Cols() &&
                          vb.shape()[0] == va.Cols(),
                      "LayerNorm: expected [RxC], gain [C], bias [C]");
  const int64_t rows = va.Rows(), cols = va.Cols();
  Tensor out({rows, cols});
  Tensor xhat({rows, cols});
  std::vector<double> inv_std(rows);
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = va.data().data() + r * cols;
    double mu = 0.0;
    for (int64_t c = 0; c < cols; ++c) mu += x[c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (int64_t c = 0; c < cols; ++c) var += (x[c] - mu) * (x[c] - mu);
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (int64_t c = 0; c < cols; ++c) {
      double xh = (x[c] - mu) * inv;
      xhat[r * cols + c] = xh;
      out[r * cols + c] = xh * vg[c] + vb[c];
    }
  }
  int32_t ia = a.id, ig = gain.id, ib = bias.id;
  return t.Emit(
      std::move(out), {ia, ig, ib},
      [ia, ig, ib, rows, cols, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape& t, int32_t self) {
        const Tensor& g = t.Grad(Var{&t, self});
        const Tensor& vg = t.Value(Var{&t, ig});
        if (t.RequiresGrad(Var{&t, ig})) {
          Tensor& dg = t.MutableGrad(ig);
          for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < cols; ++c)
              dg[c] += g[r * cols + c] * xhat[r * cols + c];
        }
        if (t.RequiresGrad(Var{&t, ib})) {
          Tensor& db = t.MutableGrad(ib);
          for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < cols; ++c) db[c] += g[r * cols + c];
        }
        if (t.RequiresGrad(Var{&t, ia})) {
          Tensor& da = t.MutableGrad(ia);
          for (int64_t r = 0; r < rows; ++r) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (int64_t c = 0; c < cols; ++c) {
              double dxh = g[r * cols + c] * vg[c];
              mean_dxhat += dxh;
              mean_dxhat_xhat += dxh * xhat[r * cols + c];
            }
            mean_dxhat /= static_cast<double>(cols);
            mean_dxhat_xhat /= static_cast<double>(cols);
            for (int64_t c = 0; c < cols; ++c) {
              double dxh = g[r * cols + c] * vg[c];
              da[r * cols + c] += inv_std[r] * (dxh - mean_dxhat -
                                                xhat[r * cols + c] *
                                                    mean_dxhat_xhat);
            }
          }
        }
      });
}

Var Reshape(Var a, std::vector<int64_t> shape) {
  Tape& t = *a.tape;
  const Tensor& va = t.Value(a);
  Tensor out(std::move(shape), va.data());
  int32_t ia = a.id;
  return t.Emit(std::move(out), {ia}, [ia](Tape& t, int32_t self) {
    const Tensor& g = t.Grad(Var{&t, self});
    Tensor& da = t.MutableGrad(ia);
    for (int64_t i = 0; i < g.NumElements(); ++i) da[i] += g[i];
  });
}

// ---------------------------------------------------------------------------
// Transducer forward DP with occupancy-based gradient

Var TransducerNll(Var log_blank, Var log_label, int64_t num_labels) {
  CheckSameTape(log_blank, log_label);
  Tape& tape = *log_blank.tape;
  const Tensor& lb = tape.Value(log_blank);
  const Tensor& ll = tape.Value(log_label);
  CASCADE_CHECK_USAGE(lb.Rank() == 2 && lb.SameShape(ll),
                      "TransducerNll: inputs must be equal-shape [T x (U+1)]");
  const int64_t T = lb.Rows();
  const int64_t U = num_labels;
  CASCADE_CHECK_USAGE(T >= 1 && U >= 0 && lb.Cols() == U + 1,
                      "TransducerNll: T >= 1 and cols == num_labels + 1");

  // alpha(t,u): log prob of consuming t frames and emitting u labels.
  Tensor alpha({T, U + 1});
  auto A = [&](int64_t t, int64_t u) -> double& { return alpha.At(t, u); };
  A(0, 0) = 0.0;
  for (int64_t u = 1; u <= U; ++u) A(0, u) = A(0, u - 1) + ll.At(0, u - 1);
  for (int64_t t = 1; t < T; ++t) {
    A(t, 0) = A(t - 1, 0) + lb.At(t - 1, 0);
    for (int64_t u = 1; u <= U; ++u) {
      A(t, u) = LogSumExp2(A(t - 1, u) + lb.At(t - 1, u),
                           A(t, u - 1) + ll.At(t, u - 1));
    }
  }
  const double log_z = A(T - 1, U) + lb.At(T - 1, U);

  int32_t ilb = log_blank.id, ill = log_label.id;
  return tape.Emit(
      Tensor::Scalar(-log_z), {ilb, ill},
      [ilb, ill, T, U, alpha = std::move(alpha), log_z](Tape& tape,
                                                        int32_t self) {
        const double up = tape.Grad(Var{&tape, self})[0];
        if (log_z == kNegInf) return;  // no finite path; gradient undefined
        const Tensor& lb = tape.Value(Var{&tape, ilb});
        const Tensor& ll = tape.Value(Var{&tape, ill});
        Tensor beta({T, U + 1});
        auto B = [&](int64_t t, int64_t u) -> double& { return beta.At(t, u); };
        B(T - 1, U) = lb.At(T - 1, U);
        for (int64_t t = T - 2; t >= 0; --t)
          B(t, U) = lb.At(t, U) + B(t + 1, U);
        for (int64_t u = U - 1; u >= 0; --u)
          B(T - 1, u) = ll.At(T - 1, u) + B(T - 1, u + 1);
        for (int64_t t = T - 2; t >= 0; --t)
          for (int64_t u = U - 1; u >= 0; --u)
            B(t, u) = LogSumExp2(lb.At(t, u) + B(t + 1, u),
                                 ll.At(t, u) + B(t, u + 1));

        const bool need_lb = tape.RequiresGrad(Var{&tape, ilb});
        const bool need_ll = tape.RequiresGrad(Var{&tape, ill});
        Tensor* dlb = need_lb ? &tape.MutableGrad(ilb) : nullptr;
        Tensor* dll = need_ll ? &tape.MutableGrad(ill) : nullptr;
        for (int64_t t = 0; t < T; ++t) {
          for (int64_t u = 0; u <= U; ++u) {
            const double a = alpha.At(t, u);
            if (need_lb) {
              double occ;
              if (t < T - 1) {
                occ = std::exp(a + lb.At(t, u) + beta.At(t + 1, u) - log_z);
              } else {
                // At the last frame only the terminating blank at u == U
                // carries probability mass.
                occ = (u == U) ? std::exp(a + lb.At(t, u) - log_z) : 0.0;
              }
              dlb->At(t, u) += up * (-occ);
            }
            if (need_ll && u < U) {
              double occ =
                  std::exp(a + ll.At(t, u) + beta.At(t, u + 1) - log_z);
              dll->At(t, u) += up * (-occ);
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

double GradCheck(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                 double eps) {
  CASCADE_CHECK_USAGE(eps > 0, "GradCheck: eps must be positive");
  Tape tape;
  Var leaf = tape.Leaf(x, /*requires_grad=*/true);
  Var out = f(tape, leaf);
  CASCADE_CHECK_USAGE(tape.Value(out).NumElements() == 1,
                      "GradCheck: f must produce a scalar");
  const double fx = tape.Value(out)[0];
  CASCADE_CHECK_RUNTIME(std::isfinite(fx),
                        "GradCheck: f(x) is not finite: ", fx);
  tape.Backward(out);
  const Tensor autodiff = tape.Grad(leaf);

  double max_rel = 0.0;
  for (int64_t i = 0; i < x.NumElements(); ++i) {
    Tensor xp = x;
    xp[i] += eps;
    Tape tp;
    double fp = tp.Value(f(tp, tp.Leaf(xp, false)))[0];
    Tensor xm = x;
    xm[i] -= eps;
    Tape tm;
    double fm = tm.Value(f(tm, tm.Leaf(xm, false)))[0];
    CASCADE_CHECK_RUNTIME(std::isfinite(fp) && std::isfinite(fm),
                          "GradCheck: perturbed evaluation not finite");
    const double fd = (fp - fm) / (2.0 * eps);
    const double rel =
        std::abs(autodiff[i] - fd) / std::max(1.0, std::abs(fd));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace cascade
