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

#pragma once

#include <span>
#include <vector>

namespace devafuse {

// Undirected vertex-weighted graph; adjacency lists must be symmetric.
struct WeightedGraph {
  std::vector<double> weights;
  std::vector<std::vector<int>> adjacency;
};

struct MwisOptions {
  // Components above this many vertices fall back to greedy selection.
  int exact_cap = 24;
  // Objectives within this distance of the optimum count as ties.
  double tie_epsilon = 1e-9;
};

struct MwisResult {
  std::vector<bool> selected;
  double objective = 0.0;
  int num_components = 0;
  int largest_component = 0;
  // Number of components solved greedily because they exceeded the cap.
  int greedy_components = 0;
};

// Maximum-weight independent set, solved exactly per connected component.
//
// `priority` lists every vertex once, most preferred first. Among all
// independent sets whose weight ties the optimum, the solver returns the one
// whose indicator vector, read in priority order, is lexicographically
// largest; i.e. it keeps the most preferred vertex it can afford.
//
// Each component branches on its first remaining vertex in priority order,
// memoizing subproblem values on the remaining-vertex bitmask; a subset with
// no positive vertex is worth zero without further search. The objective is
// summed in vertex-index order.
MwisResult SolveMwis(const WeightedGraph& graph, std::span<const int> priority,
                     const MwisOptions& options = {});

}  // namespace devafuse
