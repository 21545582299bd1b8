// Copyright 2026 The specmix Authors. All Rights Reserved.
//
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

#pragma once

#include <array>
#include <cstdint>

namespace specmix {

// splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64_next(std::uint64_t& state);

// One-shot splitmix64 of a value; used for seed splitting.
std::uint64_t splitmix64(std::uint64_t value);

/// xoshiro256** seeded through splitmix64, with a buffered Box-Muller
/// normal sampler. The output stream depends only on the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Top 53 bits of next_u64() scaled to [0, 1).
  double uniform();

  /// lo + (hi - lo) * uniform().
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n) by multiply-shift on the top 53 bits.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal deviate. Deviates are produced in Box-Muller pairs;
  /// the second one is buffered for the next call.
  double gaussian();

  /// Generator for a parallel worker: seed = splitmix64(seed ^ worker_index).
  Rng child(std::uint64_t worker_index) const;

  /// Box-Muller transform of u1 in (0,1] and u2 in [0,1).
  static std::array<double, 2> box_muller(double u1, double u2);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace specmix
