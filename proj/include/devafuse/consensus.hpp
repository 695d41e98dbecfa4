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

#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "devafuse/mwis.hpp"
#include "devafuse/propagation.hpp"
#include "devafuse/segmentation.hpp"

namespace devafuse {

// A clip segment aligned to the target frame.
struct Proposal {
  BinaryMask mask;
  int source_frame_offset = 0;
  SegmentId source_segment_id = 0;
  std::optional<ClassId> class_label;
  std::optional<double> confidence;
};

struct SupportEdge {
  int a = 0;  // a < b
  int b = 0;
  double iou = 0.0;
};

// Proposals are vertices; two proposals support each other (and conflict)
// when their IoU exceeds theta. A vertex weight is the IoU sum over its
// supporters minus alpha.
struct SupportGraph {
  double alpha = 0.5;
  double theta = 0.5;
  std::vector<SupportEdge> edges;
  WeightedGraph graph;

  size_t size() const { return graph.weights.size(); }
  bool Adjacent(int i, int j) const;
};

struct ConsensusConfig {
  double alpha = 0.5;
  double theta = 0.5;
  int exact_cap = 24;
  // When false, clip frames are pooled without alignment.
  bool spatial_alignment = true;
};

struct ConsensusSolution {
  std::vector<bool> selected;
  double objective = 0.0;
  int greedy_components = 0;
};

struct ConsensusTrace {
  bool passthrough = false;  // single-frame clip
  std::vector<Proposal> pool;
  SupportGraph graph;
  ConsensusSolution solution;
  Segmentation output;
};

// Pools every segment of every clip frame, aligned to `target_frame`
// (clip[0] must be the target). `aligner` may be null to skip alignment.
// Segments that align to nothing are dropped.
std::vector<Proposal> PoolProposals(std::span<const Segmentation> clip,
                                    int target_frame,
                                    const Propagator* aligner);

SupportGraph BuildSupportGraph(std::span<const Proposal> pool, double alpha,
                               double theta);

// Tie-break order: lower source offset, then larger area, then pool index.
std::vector<int> TiePriority(std::span<const Proposal> pool);

// Exact maximizer of the summed weights of selected proposals subject to no
// two selected proposals supporting each other. Components larger than
// exact_cap are solved greedily and a warning is logged.
ConsensusSolution SolveConsensus(const SupportGraph& graph,
                                 std::span<const Proposal> pool,
                                 int exact_cap = 24);

// Selected proposals rendered without overlap; output ids are 1..k in pool
// order and labels/confidences carry over from the proposals.
Segmentation RenderConsensus(int target_frame, int width, int height,
                             std::span<const Proposal> pool,
                             const std::vector<bool>& selected);

ConsensusTrace TraceConsensus(std::span<const Segmentation> clip,
                              const Propagator* aligner,
                              const ConsensusConfig& config);

// Denoised segmentation of clip[0]'s frame. A single-frame clip passes
// through verbatim.
Segmentation Consensus(std::span<const Segmentation> clip,
                       const Propagator* aligner,
                       const ConsensusConfig& config);

}  // namespace devafuse
