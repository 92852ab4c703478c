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

// Maximum-weight bipartite assignment (Kuhn-Munkres with potentials).
//
// For an n x m weight matrix the result pairs min(n, m) rows with distinct
// columns so that the total weight is maximal. Rectangular inputs are padded
// to square with zero-weight dummy rows or columns; every real row (or
// column, whichever side is smaller) is matched to a real partner.

#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "layoutplan/error.hpp"

namespace layoutplan {

struct Assignment {
  // (row, column) pairs sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total = 0.0;
};

inline Assignment hungarian_max(const std::vector<std::vector<double>>& weights) {
  const std::size_t rows = weights.size();
  const std::size_t cols = rows ? weights[0].size() : 0;
  for (const auto& r : weights) {
    if (r.size() != cols) {
      throw Error(ErrorCode::kInvalidArgument, "ragged weight matrix");
    }
    for (double w : r) {
      if (!std::isfinite(w)) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite weight");
      }
    }
  }
  Assignment out;
  if (rows == 0 || cols == 0) return out;

  const std::size_t n = std::max(rows, cols);
  auto cost = [&](std::size_t i, std::size_t j) -> double {
    // 1-based indices; dummy cells cost 0.
    if (i > rows || j > cols) return 0.0;
    return -weights[i - 1][j - 1];
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(rows + 1, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (match[j] >= 1 && match[j] <= rows && j <= cols) row_to_col[match[j]] = j;
  }
  for (std::size_t i = 1; i <= rows; ++i) {
    if (row_to_col[i] == 0) continue;
    out.pairs.emplace_back(i - 1, row_to_col[i] - 1);
    out.total += weights[i - 1][row_to_col[i] - 1];
  }
  return out;
}

}  // namespace layoutplan
