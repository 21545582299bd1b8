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

#include "specmix/rng.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

namespace specmix {
namespace {

// Frozen from tests/oracles/xoshiro_reference.py, an independent Python
// implementation of splitmix64 seeding and xoshiro256**.
struct Vector {
  std::uint64_t seed;
  std::array<std::uint64_t, 4> out;
};

constexpr Vector kVectors[] = {
    {0, {0x99ec5f36cb75f2b4ULL, 0xbf6e1f784956452aULL, 0x1a5f849d4933e6e0ULL,
         0x6aa594f1262d2d2cULL}},
    {1, {0xb3f2af6d0fc710c5ULL, 0x853b559647364ceaULL, 0x92f89756082a4514ULL,
         0x642e1c7bc266a3a7ULL}},
    {2, {0x1a28690da8a8d057ULL, 0xb9bb8042daedd58aULL, 0x2f1829af001ef205ULL,
         0xbf733e63d139683dULL}},
};

TEST(Rng, MatchesReferenceVectors) {
  for (const auto& v : kVectors) {
    Rng rng(v.seed);
    for (std::uint64_t expected : v.out) EXPECT_EQ(rng.next_u64(), expected) << v.seed;
  }
}

TEST(Rng, Splitmix64KnownValue) {
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64_next(state), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, UniformUsesTop53Bits) {
  Rng rng(7);
  EXPECT_EQ(rng.uniform(), 0.7005764821796896);
  Rng a(11), b(11);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, static_cast<double>(b.next_u64() >> 11) * 0x1.0p-53);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, UniformRangeAndBelow) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform(0.1, 0.5);
    EXPECT_GE(u, 0.1);
    EXPECT_LT(u, 0.5);
    EXPECT_LT(rng.below(7), 7u);
  }
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 50000; ++i) ++hist[rng.below(5)];
  for (int count : hist) EXPECT_NEAR(count, 10000, 400);
  EXPECT_EQ(rng.below(0), 0u);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Rng, GaussianBuffersPairs) {
  Rng a(5), b(5);
  const double z0 = a.gaussian();
  const double z1 = a.gaussian();
  const double u1 = 1.0 - b.uniform();
  const double u2 = b.uniform();
  const auto pair = Rng::box_muller(u1, u2);
  EXPECT_EQ(z0, pair[0]);
  EXPECT_EQ(z1, pair[1]);
  // The pair consumed exactly two uniforms.
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, GaussianMoments) {
  Rng rng(9);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.gaussian();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ChildStreamsAreDeterministicAndDistinct) {
  const Rng root(42);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 16; ++i) {
    Rng c1 = root.child(i), c2 = root.child(i);
    EXPECT_EQ(c1.seed(), splitmix64(42 ^ i));
    const std::uint64_t v = c1.next_u64();
    EXPECT_EQ(v, c2.next_u64());
    firsts.insert(v);
  }
  EXPECT_EQ(firsts.size(), 16u);
}

}  // namespace
}  // namespace specmix
