// src/tensor.cc

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

#include "cascade/tensor.h"

#include <cmath>
#include <numeric>

namespace cascade {

namespace {
int64_t Product(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t e : shape) {
    CASCADE_CHECK_USAGE(e >= 0, "negative extent in tensor shape");
    n *= e;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<size_t>(Product(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CASCADE_CHECK_USAGE(Product(shape_) == static_cast<int64_t>(data_.size()),
                      "tensor shape/data size mismatch");
}

int64_t Tensor::Rows() const {
  CASCADE_CHECK_USAGE(Rank() == 2, "Rows() requires a rank-2 tensor");
  return shape_[0];
}

int64_t Tensor::Cols() const {
  CASCADE_CHECK_USAGE(Rank() == 2, "Cols() requires a rank-2 tensor");
  return shape_[1];
}

double Tensor::ScalarValue() const {
  CASCADE_CHECK_USAGE(NumElements() == 1, "ScalarValue() on non-scalar");
  return data_[0];
}

bool Tensor::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace cascade
