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

#include "devafuse/segmentation.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_set>

namespace devafuse {

const Segment* Segmentation::Find(SegmentId id) const {
  for (const auto& s : segments) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Segmentation EmptySegmentation(int frame_index, int width, int height) {
  return Segmentation{frame_index, width, height, {}};
}

void Validate(const Segmentation& seg) {
  std::unordered_set<SegmentId> ids;
  for (const auto& s : seg.segments) {
    if (s.mask.width() != seg.width || s.mask.height() != seg.height) {
      throw MaskError("segment " + std::to_string(s.id) +
                      " has dimensions different from its frame");
    }
    if (!ids.insert(s.id).second) {
      throw MaskError("duplicate segment id " + std::to_string(s.id));
    }
  }
  std::vector<uint8_t> seen(static_cast<size_t>(seg.width) * seg.height, 0);
  for (const auto& s : seg.segments) {
    bool clash = false;
    s.mask.ForEachSpan([&](int64_t start, int64_t len) {
      for (int64_t k = start; k < start + len; ++k) {
        if (seen[k]) clash = true;
        seen[k] = 1;
      }
    });
    if (clash) {
      throw MaskError("segment " + std::to_string(s.id) +
                      " overlaps another segment");
    }
  }
}

bool IsValid(const Segmentation& seg) {
  try {
    Validate(seg);
    return true;
  } catch (const MaskError&) {
    return false;
  }
}

Segmentation RenderNonOverlapping(int frame_index, int width, int height,
                                  std::vector<Segment> segments) {
  std::vector<size_t> order(segments.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const int64_t area_a = segments[a].mask.area();
    const int64_t area_b = segments[b].mask.area();
    if (area_a != area_b) return area_a > area_b;
    return segments[a].id > segments[b].id;
  });

  std::vector<int32_t> canvas(static_cast<size_t>(width) * height, -1);
  for (size_t idx : order) {
    const auto& m = segments[idx].mask;
    if (m.width() != width || m.height() != height) {
      throw MaskError("segment " + std::to_string(segments[idx].id) +
                      " has dimensions different from the canvas");
    }
    m.ForEachSpan([&](int64_t start, int64_t len) {
      std::fill_n(canvas.begin() + start, len, static_cast<int32_t>(idx));
    });
  }

  std::vector<std::vector<uint8_t>> bitmaps(segments.size());
  std::vector<bool> touched(segments.size(), false);
  for (size_t k = 0; k < canvas.size(); ++k) {
    const int32_t owner = canvas[k];
    if (owner < 0) continue;
    auto& bm = bitmaps[owner];
    if (bm.empty()) bm.assign(canvas.size(), 0);
    bm[k] = 1;
    touched[owner] = true;
  }

  Segmentation out = EmptySegmentation(frame_index, width, height);
  for (size_t i = 0; i < segments.size(); ++i) {
    if (!touched[i]) continue;
    Segment s = std::move(segments[i]);
    s.mask = BinaryMask::FromBitmap(width, height, bitmaps[i]);
    out.segments.push_back(std::move(s));
  }
  return out;
}

std::vector<int32_t> ToIndexMap(const Segmentation& seg) {
  std::vector<int32_t> map(static_cast<size_t>(seg.width) * seg.height, -1);
  for (size_t i = 0; i < seg.segments.size(); ++i) {
    seg.segments[i].mask.ForEachSpan([&](int64_t start, int64_t len) {
      std::fill_n(map.begin() + start, len, static_cast<int32_t>(i));
    });
  }
  return map;
}

}  // namespace devafuse
