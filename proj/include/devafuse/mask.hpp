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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace devafuse {

class MaskError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Axis-aligned pixel box, half-open: [x0, x1) x [y0, y1).
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

// One object's pixel support on a frame.
//
// Stored as uncompressed run lengths over the row-major pixel order. Runs
// alternate background/foreground and always start with a background run,
// which is zero when pixel (0, 0) is foreground. The representation is kept
// canonical: no interior zero-length run and no trailing zero run, so two
// masks with the same pixels compare equal run-for-run.
class BinaryMask {
 public:
  BinaryMask() = default;

  // All-background mask.
  BinaryMask(int width, int height);

  // Validates and canonicalizes `runs`. Throws MaskError if the runs do not
  // sum to width * height.
  static BinaryMask FromRuns(int width, int height,
                             std::vector<uint32_t> runs);
  // Nonzero bytes are foreground.
  static BinaryMask FromBitmap(int width, int height,
                               std::span<const uint8_t> bitmap);
  static BinaryMask FromBox(int width, int height, Box box);
  static BinaryMask Full(int width, int height);

  // COCO uncompressed RLE counts are column-major; these convert at the
  // interchange boundary.
  static BinaryMask FromCocoCounts(int width, int height,
                                   std::span<const uint32_t> counts);
  std::vector<uint32_t> ToCocoCounts() const;

  std::vector<uint8_t> ToBitmap() const;

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<uint32_t>& runs() const { return runs_; }

  int64_t area() const { return area_; }
  bool empty() const { return area_ == 0; }
  bool SameShape(const BinaryMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool at(int x, int y) const;
  // Tight bounding box of the foreground; empty box for empty masks.
  Box BoundingBox() const;

  // Visits each foreground span as (row-major start index, length).
  template <typename Fn>
  void ForEachSpan(Fn&& fn) const {
    int64_t pos = 0;
    for (size_t i = 0; i < runs_.size(); ++i) {
      if (i % 2 == 1) fn(pos, static_cast<int64_t>(runs_[i]));
      pos += runs_[i];
    }
  }

  bool operator==(const BinaryMask& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint32_t> runs_;
  int64_t area_ = 0;
};

int64_t Area(const BinaryMask& m);
int64_t IntersectionArea(const BinaryMask& a, const BinaryMask& b);
// |a ∩ b| / |a ∪ b|, defined as 0 when both masks are empty. Throws MaskError
// on a dimension mismatch.
double Iou(const BinaryMask& a, const BinaryMask& b);

BinaryMask Union(const BinaryMask& a, const BinaryMask& b);
BinaryMask Intersection(const BinaryMask& a, const BinaryMask& b);
// a \ b
BinaryMask Difference(const BinaryMask& a, const BinaryMask& b);

// Shifts the mask by (dx, dy); pixels leaving the canvas are dropped.
BinaryMask Translate(const BinaryMask& m, int dx, int dy);
// Square structuring element of half-width `radius` (radius 0 is identity).
BinaryMask Dilate(const BinaryMask& m, int radius);
BinaryMask Erode(const BinaryMask& m, int radius);

}  // namespace devafuse
