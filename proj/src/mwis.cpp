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

#include "devafuse/mwis.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace devafuse {
namespace {

class ComponentSolver {
 public:
  // `vertices` must already be in priority order.
  ComponentSolver(const WeightedGraph& graph, const std::vector<int>& vertices,
                  double tie_epsilon)
      : vertices_(vertices), tie_epsilon_(tie_epsilon) {
    std::unordered_map<int, int> local;
    for (size_t i = 0; i < vertices.size(); ++i) {
      local[vertices[i]] = static_cast<int>(i);
    }
    weights_.resize(vertices.size());
    closed_.resize(vertices.size());
    positive_mask_ = 0;
    for (size_t i = 0; i < vertices.size(); ++i) {
      weights_[i] = graph.weights[vertices[i]];
      closed_[i] = 1u << i;
      for (int n : graph.adjacency[vertices[i]]) {
        closed_[i] |= 1u << local.at(n);
      }
      if (weights_[i] > 0.0) positive_mask_ |= 1u << i;
    }
  }

  std::vector<int> Solve() {
    const uint32_t all =
        vertices_.size() == 32 ? ~0u : ((1u << vertices_.size()) - 1u);
    std::vector<int> chosen;
    uint32_t remaining = all;
    while (remaining != 0) {
      const int v = std::countr_zero(remaining);
      const double with = weights_[v] + Best(remaining & ~closed_[v]);
      if (with >= Best(remaining) - tie_epsilon_) {
        chosen.push_back(vertices_[v]);
        remaining &= ~closed_[v];
      } else {
        remaining &= ~(1u << v);
      }
    }
    return chosen;
  }

 private:
  double Best(uint32_t remaining) {
    if (remaining == 0) return 0.0;
    // Without positive vertices the best any subset can do is zero.
    if ((remaining & positive_mask_) == 0) return 0.0;
    if (auto it = memo_.find(remaining); it != memo_.end()) return it->second;
    const int v = std::countr_zero(remaining);
    const double without = Best(remaining & ~(1u << v));
    double best = without;
    if (weights_[v] > -tie_epsilon_) {
      best = std::max(best, weights_[v] + Best(remaining & ~closed_[v]));
    }
    memo_.emplace(remaining, best);
    return best;
  }

  std::vector<int> vertices_;
  double tie_epsilon_;
  std::vector<double> weights_;
  std::vector<uint32_t> closed_;
  uint32_t positive_mask_ = 0;
  std::unordered_map<uint32_t, double> memo_;
};

std::vector<int> GreedyComponent(const WeightedGraph& graph,
                                 const std::vector<int>& vertices,
                                 const std::vector<int>& rank) {
  std::vector<int> order = vertices;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (graph.weights[a] != graph.weights[b]) {
      return graph.weights[a] > graph.weights[b];
    }
    return rank[a] < rank[b];
  });
  std::vector<bool> blocked(graph.weights.size(), false);
  std::vector<int> chosen;
  for (int v : order) {
    if (graph.weights[v] <= 0.0 || blocked[v]) continue;
    chosen.push_back(v);
    for (int n : graph.adjacency[v]) blocked[n] = true;
  }
  return chosen;
}

}  // namespace

MwisResult SolveMwis(const WeightedGraph& graph, std::span<const int> priority,
                     const MwisOptions& options) {
  const size_t n = graph.weights.size();
  if (graph.adjacency.size() != n || priority.size() != n) {
    throw std::invalid_argument("graph and priority sizes disagree");
  }
  if (options.exact_cap > 32) {
    throw std::invalid_argument("exact_cap above 32 is not supported");
  }
  std::vector<int> rank(n, -1);
  for (size_t k = 0; k < n; ++k) {
    const int v = priority[k];
    if (v < 0 || static_cast<size_t>(v) >= n || rank[v] != -1) {
      throw std::invalid_argument("priority is not a permutation");
    }
    rank[v] = static_cast<int>(k);
  }

  MwisResult result;
  result.selected.assign(n, false);
  std::vector<bool> visited(n, false);
  // Components are discovered in priority order so results are stable.
  for (int seed : priority) {
    if (visited[seed]) continue;
    std::vector<int> comp;
    std::vector<int> stack{seed};
    visited[seed] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int u : graph.adjacency[v]) {
        if (!visited[u]) {
          visited[u] = true;
          stack.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end(),
              [&](int a, int b) { return rank[a] < rank[b]; });
    ++result.num_components;
    result.largest_component =
        std::max(result.largest_component, static_cast<int>(comp.size()));

    std::vector<int> chosen;
    if (static_cast<int>(comp.size()) > options.exact_cap) {
      ++result.greedy_components;
      chosen = GreedyComponent(graph, comp, rank);
    } else {
      chosen = ComponentSolver(graph, comp, options.tie_epsilon).Solve();
    }
    for (int v : chosen) result.selected[v] = true;
  }
  for (size_t v = 0; v < n; ++v) {
    if (result.selected[v]) result.objective += graph.weights[v];
  }
  return result;
}

}  // namespace devafuse
