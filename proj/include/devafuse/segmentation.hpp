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

#include <cstdint>
#include <optional>
#include <vector>

#include "devafuse/mask.hpp"

namespace devafuse {

using SegmentId = int64_t;
using ClassId = int32_t;

struct Segment {
  SegmentId id = 0;
  BinaryMask mask;
  std::optional<ClassId> class_label;
  std::optional<double> confidence;

  bool operator==(const Segment&) const = default;
};

// A frame's set of mutually disjoint segments.
struct Segmentation {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  std::vector<Segment> segments;

  const Segment* Find(SegmentId id) const;
  bool operator==(const Segmentation&) const = default;
};

Segmentation EmptySegmentation(int frame_index, int width, int height);

// Throws MaskError naming the violated invariant: shared dimensions, unique
// ids, pairwise-disjoint masks.
void Validate(const Segmentation& seg);
bool IsValid(const Segmentation& seg);

// Paints segments largest-first so smaller segments win contested pixels.
// Equal areas paint in descending id order, so the lower id wins. Segments
// left empty are dropped; the survivors keep their input order.
Segmentation RenderNonOverlapping(int frame_index, int width, int height,
                                  std::vector<Segment> segments);

// Dense per-pixel index map: -1 for background, otherwise the position of the
// owning segment in `seg.segments`.
std::vector<int32_t> ToIndexMap(const Segmentation& seg);

}  // namespace devafuse
