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

#include <vector>

namespace devafuse {

// Rectangular linear assignment (Hungarian / Kuhn-Munkres, O(n^2 m)).
// Returns, for each row, the assigned column or -1. Every row is assigned
// when rows <= cols, otherwise every column is. Minimizes total cost.
std::vector<int> SolveAssignment(const std::vector<std::vector<double>>& cost);

// Same, maximizing total score.
std::vector<int> SolveMaxAssignment(
    const std::vector<std::vector<double>>& score);

}  // namespace devafuse
