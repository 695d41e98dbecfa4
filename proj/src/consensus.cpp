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

#include "devafuse/consensus.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "devafuse/log.hpp"

namespace devafuse {

bool SupportGraph::Adjacent(int i, int j) const {
  const auto& adj = graph.adjacency.at(i);
  return std::find(adj.begin(), adj.end(), j) != adj.end();
}

std::vector<Proposal> PoolProposals(std::span<const Segmentation> clip,
                                    int target_frame,
                                    const Propagator* aligner) {
  std::vector<Proposal> pool;
  for (size_t offset = 0; offset < clip.size(); ++offset) {
    const Segmentation aligned =
        (aligner != nullptr && offset > 0)
            ? AlignOne(clip[offset], target_frame, *aligner)
            : clip[offset];
    for (const auto& s : aligned.segments) {
      if (s.mask.empty()) continue;
      pool.push_back(Proposal{s.mask, static_cast<int>(offset), s.id,
                              s.class_label, s.confidence});
    }
  }
  return pool;
}

SupportGraph BuildSupportGraph(std::span<const Proposal> pool, double alpha,
                               double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("support threshold must lie in (0, 1)");
  }
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  SupportGraph g;
  g.alpha = alpha;
  g.theta = theta;
  const size_t n = pool.size();
  std::vector<double> support(n, 0.0);
  g.graph.adjacency.assign(n, {});
  std::vector<Box> boxes(n);
  for (size_t i = 0; i < n; ++i) boxes[i] = pool[i].mask.BoundingBox();

  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const Box& a = boxes[i];
      const Box& b = boxes[j];
      if (a.x1 <= b.x0 || b.x1 <= a.x0 || a.y1 <= b.y0 || b.y1 <= a.y0) {
        continue;
      }
      const double iou = Iou(pool[i].mask, pool[j].mask);
      if (iou <= theta) continue;
      support[i] += iou;
      support[j] += iou;
      g.edges.push_back(SupportEdge{static_cast<int>(i), static_cast<int>(j),
                                    iou});
      g.graph.adjacency[i].push_back(static_cast<int>(j));
      g.graph.adjacency[j].push_back(static_cast<int>(i));
    }
  }
  g.graph.weights.resize(n);
  for (size_t i = 0; i < n; ++i) g.graph.weights[i] = support[i] - alpha;
  return g;
}

std::vector<int> TiePriority(std::span<const Proposal> pool) {
  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (pool[a].source_frame_offset != pool[b].source_frame_offset) {
      return pool[a].source_frame_offset < pool[b].source_frame_offset;
    }
    return pool[a].mask.area() > pool[b].mask.area();
  });
  return order;
}

ConsensusSolution SolveConsensus(const SupportGraph& graph,
                                 std::span<const Proposal> pool,
                                 int exact_cap) {
  if (graph.size() != pool.size()) {
    throw std::invalid_argument("support graph and pool sizes disagree");
  }
  const auto priority = TiePriority(pool);
  MwisOptions options;
  options.exact_cap = exact_cap;
  MwisResult r = SolveMwis(graph.graph, priority, options);
  if (r.greedy_components > 0) {
    Log().warn(
        "consensus: {} component(s) exceed the exact-solve cap of {} "
        "(largest {}); using greedy selection",
        r.greedy_components, exact_cap, r.largest_component);
  }
  return ConsensusSolution{std::move(r.selected), r.objective,
                           r.greedy_components};
}

Segmentation RenderConsensus(int target_frame, int width, int height,
                             std::span<const Proposal> pool,
                             const std::vector<bool>& selected) {
  std::vector<Segment> chosen;
  SegmentId next_id = 1;
  for (size_t i = 0; i < pool.size(); ++i) {
    if (!selected[i]) continue;
    chosen.push_back(Segment{next_id++, pool[i].mask, pool[i].class_label,
                             pool[i].confidence});
  }
  return RenderNonOverlapping(target_frame, width, height, std::move(chosen));
}

ConsensusTrace TraceConsensus(std::span<const Segmentation> clip,
                              const Propagator* aligner,
                              const ConsensusConfig& config) {
  if (clip.empty()) throw std::invalid_argument("consensus needs a clip");
  ConsensusTrace trace;
  const Segmentation& target = clip.front();
  if (clip.size() == 1) {
    trace.passthrough = true;
    trace.pool = PoolProposals(clip, target.frame_index, nullptr);
    trace.solution.selected.assign(trace.pool.size(), true);
    trace.output = target;
    return trace;
  }
  trace.pool = PoolProposals(clip, target.frame_index,
                             config.spatial_alignment ? aligner : nullptr);
  trace.graph = BuildSupportGraph(trace.pool, config.alpha, config.theta);
  trace.solution = SolveConsensus(trace.graph, trace.pool, config.exact_cap);
  trace.output = RenderConsensus(target.frame_index, target.width,
                                 target.height, trace.pool,
                                 trace.solution.selected);
  return trace;
}

Segmentation Consensus(std::span<const Segmentation> clip,
                       const Propagator* aligner,
                       const ConsensusConfig& config) {
  return TraceConsensus(clip, aligner, config).output;
}

}  // namespace devafuse
