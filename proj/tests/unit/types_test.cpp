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

#include "specmix/types.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "specmix/error.hpp"

namespace specmix {
namespace {

TEST(Image, ClampsAndRejectsNaN) {
  Image x(1, 2, 1, std::vector<double>{-0.5, 1.5});
  EXPECT_EQ(x.at(0, 0), 0.0);
  EXPECT_EQ(x.at(0, 1), 1.0);
  EXPECT_THROW(Image(1, 1, 1, std::vector<double>{std::nan("")}), ValueError);
  EXPECT_THROW(Image(1, 2, 1, std::vector<double>{0.0}), DimensionMismatch);
  EXPECT_DOUBLE_EQ(x.mean(), 0.5);
}

TEST(BinaryMask, ComplementAndSubset) {
  BinaryMask m(2, 2);
  m.at(0, 1) = 1;
  const BinaryMask c = m.complement();
  EXPECT_EQ(m.popcount(), 1u);
  EXPECT_EQ(c.popcount(), 3u);
  EXPECT_TRUE(m.subset_of(BinaryMask(2, 2, 1)));
  EXPECT_FALSE(c.subset_of(m));
}

TEST(LabelMap, DiscContainsCup) {
  LabelMap y(1, 3, std::vector<std::uint8_t>{0, 1, 2});
  EXPECT_EQ(y.disc_mask().bits, (std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_EQ(y.cup_mask().bits, (std::vector<std::uint8_t>{0, 0, 1}));
  EXPECT_TRUE(y.cup_mask().subset_of(y.disc_mask()));
  EXPECT_EQ(y.count(1), 1u);
  EXPECT_THROW(LabelMap(1, 1, std::vector<std::uint8_t>{3}), ValueError);
  EXPECT_THROW(y.set(0, 0, 7), ValueError);
}

TEST(ProbMap, ValidatesSimplex) {
  EXPECT_NO_THROW(ProbMap(1, 1, {0.2, 0.3, 0.5}));
  EXPECT_THROW(ProbMap(1, 1, {0.2, 0.3, 0.6}), ValueError);
  EXPECT_THROW(ProbMap(1, 1, {-0.1, 0.6, 0.5}), ValueError);
  const ProbMap u = ProbMap::uniform(2, 2);
  EXPECT_DOUBLE_EQ(u.at(3, 2), 1.0 / 3.0);
  const ProbMap oh = ProbMap::one_hot(LabelMap(1, 2, std::vector<std::uint8_t>{2, 0}));
  EXPECT_EQ(oh.at(0, 2), 1.0);
  EXPECT_EQ(oh.at(1, 0), 1.0);
}

}  // namespace
}  // namespace specmix
