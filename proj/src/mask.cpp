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

#include "devafuse/mask.hpp"

#include <algorithm>
#include <numeric>

namespace devafuse {
namespace {

void CheckDims(int width, int height) {
  if (width < 0 || height < 0) {
    throw MaskError("mask dimensions must be non-negative");
  }
}

void CheckSameShape(const BinaryMask& a, const BinaryMask& b) {
  if (!a.SameShape(b)) {
    throw MaskError("mask dimension mismatch: " + std::to_string(a.width()) +
                    "x" + std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

// Appends a run of `value` pixels to a canonical run list under construction.
// `runs` always has an odd length while building: the last entry's parity
// says which value it counts.
class RunBuilder {
 public:
  void Push(bool value, uint32_t length) {
    if (length == 0) return;
    const bool last_value = (runs_.size() % 2) == 0;
    if (runs_.empty()) {
      if (value) runs_.push_back(0);
      runs_.push_back(length);
      return;
    }
    if (last_value == value) {
      runs_.back() += length;
    } else {
      runs_.push_back(length);
    }
  }

  std::vector<uint32_t> Take() { return std::move(runs_); }

 private:
  std::vector<uint32_t> runs_;
};

template <typename Op>
BinaryMask Combine(const BinaryMask& a, const BinaryMask& b, Op op) {
  CheckSameShape(a, b);
  const auto& ra = a.runs();
  const auto& rb = b.runs();
  RunBuilder out;
  size_t ia = 0, ib = 0;
  uint32_t left_a = ra.empty() ? 0 : ra[0];
  uint32_t left_b = rb.empty() ? 0 : rb[0];
  auto advance = [](const std::vector<uint32_t>& r, size_t& i,
                    uint32_t& left) {
    while (left == 0 && i + 1 < r.size()) left = r[++i];
  };
  advance(ra, ia, left_a);
  advance(rb, ib, left_b);
  while (left_a > 0 && left_b > 0) {
    const uint32_t step = std::min(left_a, left_b);
    out.Push(op(ia % 2 == 1, ib % 2 == 1), step);
    left_a -= step;
    left_b -= step;
    advance(ra, ia, left_a);
    advance(rb, ib, left_b);
  }
  return BinaryMask::FromRuns(a.width(), a.height(), out.Take());
}

}  // namespace

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  CheckDims(width, height);
  const int64_t n = static_cast<int64_t>(width) * height;
  if (n > 0) runs_.push_back(static_cast<uint32_t>(n));
}

BinaryMask BinaryMask::FromRuns(int width, int height,
                                std::vector<uint32_t> runs) {
  CheckDims(width, height);
  const int64_t total = static_cast<int64_t>(width) * height;
  int64_t sum = 0;
  for (uint32_t r : runs) sum += r;
  if (sum != total) {
    throw MaskError("run lengths sum to " + std::to_string(sum) +
                    ", expected " + std::to_string(total));
  }
  RunBuilder builder;
  for (size_t i = 0; i < runs.size(); ++i) builder.Push(i % 2 == 1, runs[i]);
  BinaryMask m;
  m.width_ = width;
  m.height_ = height;
  m.runs_ = builder.Take();
  for (size_t i = 1; i < m.runs_.size(); i += 2) m.area_ += m.runs_[i];
  return m;
}

BinaryMask BinaryMask::FromBitmap(int width, int height,
                                  std::span<const uint8_t> bitmap) {
  CheckDims(width, height);
  if (static_cast<int64_t>(bitmap.size()) !=
      static_cast<int64_t>(width) * height) {
    throw MaskError("bitmap size does not match dimensions");
  }
  RunBuilder builder;
  size_t i = 0;
  while (i < bitmap.size()) {
    const bool v = bitmap[i] != 0;
    size_t j = i + 1;
    while (j < bitmap.size() && (bitmap[j] != 0) == v) ++j;
    builder.Push(v, static_cast<uint32_t>(j - i));
    i = j;
  }
  return FromRuns(width, height, builder.Take());
}

BinaryMask BinaryMask::FromBox(int width, int height, Box box) {
  CheckDims(width, height);
  box.x0 = std::clamp(box.x0, 0, width);
  box.x1 = std::clamp(box.x1, 0, width);
  box.y0 = std::clamp(box.y0, 0, height);
  box.y1 = std::clamp(box.y1, 0, height);
  if (box.empty()) return BinaryMask(width, height);
  RunBuilder builder;
  const uint32_t w = static_cast<uint32_t>(box.x1 - box.x0);
  builder.Push(false, static_cast<uint32_t>(box.y0 * width + box.x0));
  for (int y = box.y0; y < box.y1; ++y) {
    builder.Push(true, w);
    if (y + 1 < box.y1) builder.Push(false, static_cast<uint32_t>(width) - w);
  }
  const int64_t used = static_cast<int64_t>(box.y1 - 1) * width + box.x1;
  builder.Push(false, static_cast<uint32_t>(
                          static_cast<int64_t>(width) * height - used));
  return FromRuns(width, height, builder.Take());
}

BinaryMask BinaryMask::Full(int width, int height) {
  return FromBox(width, height, Box{0, 0, width, height});
}

BinaryMask BinaryMask::FromCocoCounts(int width, int height,
                                      std::span<const uint32_t> counts) {
  CheckDims(width, height);
  const int64_t total = static_cast<int64_t>(width) * height;
  int64_t sum = 0;
  for (uint32_t c : counts) sum += c;
  if (sum != total) {
    throw MaskError("COCO counts sum to " + std::to_string(sum) +
                    ", expected " + std::to_string(total));
  }
  std::vector<uint8_t> bitmap(static_cast<size_t>(total), 0);
  int64_t pos = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (i % 2 == 1) {
      for (int64_t k = pos; k < pos + counts[i]; ++k) {
        const int64_t x = k / height;
        const int64_t y = k % height;
        bitmap[static_cast<size_t>(y * width + x)] = 1;
      }
    }
    pos += counts[i];
  }
  return FromBitmap(width, height, bitmap);
}

std::vector<uint32_t> BinaryMask::ToCocoCounts() const {
  const auto bitmap = ToBitmap();
  std::vector<uint32_t> counts;
  bool current = false;
  uint32_t run = 0;
  for (int x = 0; x < width_; ++x) {
    for (int y = 0; y < height_; ++y) {
      const bool v = bitmap[static_cast<size_t>(y) * width_ + x] != 0;
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

std::vector<uint8_t> BinaryMask::ToBitmap() const {
  std::vector<uint8_t> bitmap(static_cast<size_t>(width_) * height_, 0);
  ForEachSpan([&](int64_t start, int64_t len) {
    std::fill_n(bitmap.begin() + start, len, uint8_t{1});
  });
  return bitmap;
}

bool BinaryMask::at(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
  const int64_t target = static_cast<int64_t>(y) * width_ + x;
  int64_t pos = 0;
  for (size_t i = 0; i < runs_.size(); ++i) {
    if (target < pos + runs_[i]) return i % 2 == 1;
    pos += runs_[i];
  }
  return false;
}

Box BinaryMask::BoundingBox() const {
  if (empty()) return Box{};
  Box box{width_, height_, 0, 0};
  ForEachSpan([&](int64_t start, int64_t len) {
    const int64_t end = start + len - 1;
    const int y0 = static_cast<int>(start / width_);
    const int y1 = static_cast<int>(end / width_);
    box.y0 = std::min(box.y0, y0);
    box.y1 = std::max(box.y1, y1 + 1);
    if (y0 != y1) {
      box.x0 = 0;
      box.x1 = width_;
    } else {
      box.x0 = std::min(box.x0, static_cast<int>(start % width_));
      box.x1 = std::max(box.x1, static_cast<int>(end % width_) + 1);
    }
  });
  return box;
}

int64_t Area(const BinaryMask& m) { return m.area(); }

int64_t IntersectionArea(const BinaryMask& a, const BinaryMask& b) {
  CheckSameShape(a, b);
  // Two-pointer sweep over the foreground spans.
  std::vector<std::pair<int64_t, int64_t>> sa, sb;
  a.ForEachSpan([&](int64_t s, int64_t l) { sa.emplace_back(s, s + l); });
  b.ForEachSpan([&](int64_t s, int64_t l) { sb.emplace_back(s, s + l); });
  int64_t total = 0;
  size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const int64_t lo = std::max(sa[i].first, sb[j].first);
    const int64_t hi = std::min(sa[i].second, sb[j].second);
    if (hi > lo) total += hi - lo;
    if (sa[i].second < sb[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return total;
}

double Iou(const BinaryMask& a, const BinaryMask& b) {
  const int64_t inter = IntersectionArea(a, b);
  const int64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask Union(const BinaryMask& a, const BinaryMask& b) {
  return Combine(a, b, [](bool x, bool y) { return x || y; });
}

BinaryMask Intersection(const BinaryMask& a, const BinaryMask& b) {
  return Combine(a, b, [](bool x, bool y) { return x && y; });
}

BinaryMask Difference(const BinaryMask& a, const BinaryMask& b) {
  return Combine(a, b, [](bool x, bool y) { return x && !y; });
}

BinaryMask Translate(const BinaryMask& m, int dx, int dy) {
  const int w = m.width();
  const int h = m.height();
  std::vector<uint8_t> out(static_cast<size_t>(w) * h, 0);
  m.ForEachSpan([&](int64_t start, int64_t len) {
    for (int64_t k = start; k < start + len; ++k) {
      const int x = static_cast<int>(k % w) + dx;
      const int y = static_cast<int>(k / w) + dy;
      if (x >= 0 && y >= 0 && x < w && y < h) {
        out[static_cast<size_t>(y) * w + x] = 1;
      }
    }
  });
  return BinaryMask::FromBitmap(w, h, out);
}

namespace {

// Separable square min/max filter over a 0/1 bitmap.
std::vector<uint8_t> MorphFilter(const std::vector<uint8_t>& in, int w, int h,
                                 int radius, bool dilate) {
  std::vector<uint8_t> tmp(in.size()), out(in.size());
  // Outside the canvas counts as background for both operations.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool acc = !dilate;
      for (int k = x - radius; k <= x + radius; ++k) {
        const bool v = k >= 0 && k < w && in[static_cast<size_t>(y) * w + k];
        acc = dilate ? (acc || v) : (acc && v);
      }
      tmp[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool acc = !dilate;
      for (int k = y - radius; k <= y + radius; ++k) {
        const bool v = k >= 0 && k < h && tmp[static_cast<size_t>(k) * w + x];
        acc = dilate ? (acc || v) : (acc && v);
      }
      out[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

BinaryMask Dilate(const BinaryMask& m, int radius) {
  if (radius <= 0 || m.empty()) return m;
  return BinaryMask::FromBitmap(
      m.width(), m.height(),
      MorphFilter(m.ToBitmap(), m.width(), m.height(), radius, true));
}

BinaryMask Erode(const BinaryMask& m, int radius) {
  if (radius <= 0 || m.empty()) return m;
  return BinaryMask::FromBitmap(
      m.width(), m.height(),
      MorphFilter(m.ToBitmap(), m.width(), m.height(), radius, false));
}

}  // namespace devafuse
