// include/cascade/rng.h

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

#ifndef CASCADE_RNG_H_
#define CASCADE_RNG_H_

#include <cstdint>
#include <string_view>

namespace cascade {

// SplitMix64-based generator. Unlike the std:: distributions, every draw is
// specified here, so streams are reproducible across compilers and trivially
// serializable (state is two u64 plus the Box-Muller spare).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64();

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();

  // Uniform integer in [lo, hi] inclusive. Requires lo <= hi.
  int64_t UniformInt(int64_t lo, int64_t hi);

  // Standard normal via Box-Muller; caches the spare draw.
  double Gaussian();

  // Serializable state.
  struct State {
    uint64_t state = 0;
    uint64_t has_spare = 0;
    double spare = 0.0;
  };
  State GetState() const { return {state_, has_spare_ ? 1ull : 0ull, spare_}; }
  void SetState(const State& s);

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over the label, mixed into the master seed. Every module derives
// its stream as DeriveSeed(master, "label") so one knob controls all
// randomness.
uint64_t DeriveSeed(uint64_t master, std::string_view label);

// Convenience for per-item streams such as (step, dataset, index).
uint64_t DeriveSeed(uint64_t master, std::string_view label, uint64_t a,
                    uint64_t b = 0);

}  // namespace cascade

#endif  // CASCADE_RNG_H_
