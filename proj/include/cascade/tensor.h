// include/cascade/tensor.h

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

#ifndef CASCADE_TENSOR_H_
#define CASCADE_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "cascade/common.h"

namespace cascade {

// Dense row-major tensor of 64-bit floats. Rank is usually 1 or 2; matrix
// helpers assume rank 2. product(shape) == data.size() always holds.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor Scalar(double v) { return Tensor({1}, {v}); }
  static Tensor Zeros(std::vector<int64_t> shape) {
    return Tensor(std::move(shape));
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t NumElements() const { return static_cast<int64_t>(data_.size()); }
  int64_t Rank() const { return static_cast<int64_t>(shape_.size()); }
  bool SameShape(const Tensor& o) const { return shape_ == o.shape_; }

  int64_t Rows() const;
  int64_t Cols() const;

  double& At(int64_t r, int64_t c) { return data_[r * Cols() + c]; }
  double At(int64_t r, int64_t c) const { return data_[r * Cols() + c]; }
  double& operator[](int64_t i) { return data_[i]; }
  double operator[](int64_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double ScalarValue() const;

  bool AllFinite() const;

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

}  // namespace cascade

#endif  // CASCADE_TENSOR_H_
