/* Copyright 2026 The layoutplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "layoutplan/hungarian.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.hpp"

namespace layoutplan {
namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

TEST(HungarianMax, IdentityDominant) {
  const Assignment a = hungarian_max({{1, 0}, {0, 1}});
  EXPECT_EQ(a.pairs, (Pairs{{0, 0}, {1, 1}}));
  EXPECT_EQ(a.total, 2.0);
}

TEST(HungarianMax, CrossAssignmentBeatsDiagonal) {
  const std::vector<std::vector<double>> w{{0.9, 0.8}, {0.85, 0.1}};
  // Both permutations by hand: 0.9 + 0.1 = 1.0 vs 0.8 + 0.85 = 1.65.
  EXPECT_DOUBLE_EQ(testing::brute_force_max_assignment(w), 0.8 + 0.85);
  const Assignment a = hungarian_max(w);
  EXPECT_EQ(a.pairs, (Pairs{{0, 1}, {1, 0}}));
  EXPECT_DOUBLE_EQ(a.total, 1.65);
}

TEST(HungarianMax, SingleRowPicksArgmax) {
  const Assignment a = hungarian_max({{0.2, 0.7, 0.4}});
  EXPECT_EQ(a.pairs, (Pairs{{0, 1}}));
  EXPECT_DOUBLE_EQ(a.total, 0.7);
}

TEST(HungarianMax, TallMatrixMatchesEveryColumn) {
  const Assignment a = hungarian_max({{0.1}, {0.9}, {0.5}});
  EXPECT_EQ(a.pairs, (Pairs{{1, 0}}));
}

TEST(HungarianMax, NegativeWeightsStillFullMatching) {
  const Assignment a = hungarian_max({{-1, -5}, {-2, -1}});
  EXPECT_EQ(a.pairs.size(), 2u);
  EXPECT_EQ(a.total, -2.0);
}

TEST(HungarianMax, EmptyInput) {
  EXPECT_TRUE(hungarian_max({}).pairs.empty());
  EXPECT_TRUE(hungarian_max({{}, {}}).pairs.empty());
}

TEST(HungarianMax, RejectsNonFinite) {
  EXPECT_THROW(hungarian_max({{1.0, std::nan("")}}), Error);
  EXPECT_THROW(hungarian_max({{1.0, 2.0}, {1.0}}), Error);
}

// Weights are multiples of 1/1024 so every partial sum is exact and totals
// can be compared with ==.
TEST(HungarianMax, EqualsExhaustiveSearch) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_int_distribution<int> val(-1024, 2048);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = dim(rng), m = dim(rng);
    if (std::min(n, m) > 7) n = 7;
    std::vector<std::vector<double>> w(n, std::vector<double>(m));
    for (auto& row : w) {
      for (double& x : row) x = val(rng) / 1024.0;
    }
    const Assignment a = hungarian_max(w);
    ASSERT_EQ(a.pairs.size(), std::min(n, m));
    std::set<std::size_t> rows, cols;
    double total = 0.0;
    for (auto [i, j] : a.pairs) {
      EXPECT_TRUE(rows.insert(i).second);
      EXPECT_TRUE(cols.insert(j).second);
      total += w[i][j];
    }
    EXPECT_EQ(total, a.total);
    EXPECT_EQ(a.total, testing::brute_force_max_assignment(w)) << n << "x" << m;
  }
}

}  // namespace
}  // namespace layoutplan
