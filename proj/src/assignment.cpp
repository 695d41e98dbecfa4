// Copyright 2026 The devafuse Authors
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

#include "devafuse/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace devafuse {
namespace {

// Potentials-based Hungarian method for n <= m; a is 1-indexed internally.
std::vector<int> SolveTall(const std::vector<std::vector<double>>& a, int n,
                           int m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<int> SolveAssignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost.front().size());
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != m) {
      throw std::invalid_argument("cost matrix rows differ in length");
    }
  }
  if (m == 0) return std::vector<int>(n, -1);
  if (n <= m) return SolveTall(cost, n, m);

  std::vector<std::vector<double>> t(m, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) t[j][i] = cost[i][j];
  }
  const auto col_to_row = SolveTall(t, m, n);
  std::vector<int> row_to_col(n, -1);
  for (int j = 0; j < m; ++j) {
    if (col_to_row[j] >= 0) row_to_col[col_to_row[j]] = j;
  }
  return row_to_col;
}

std::vector<int> SolveMaxAssignment(
    const std::vector<std::vector<double>>& score) {
  std::vector<std::vector<double>> cost = score;
  for (auto& row : cost) {
    for (double& x : row) x = -x;
  }
  return SolveAssignment(cost);
}

}  // namespace devafuse
