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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "devafuse/mask.hpp"
#include "devafuse/segmentation.hpp"
#include "oracles.hpp"

using namespace devafuse;
using namespace devafuse::testing;

namespace {

Bitmap DenseShift(const Bitmap& b, int w, int h, int dx, int dy) {
  Bitmap out(b.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = x - dx, sy = y - dy;
      if (sx >= 0 && sx < w && sy >= 0 && sy < h) out[y * w + x] = b[sy * w + sx];
    }
  }
  return out;
}

Bitmap DenseMorph(const Bitmap& b, int w, int h, int r, bool dilate) {
  Bitmap out(b.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool any = false, all = true;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = x + dx, sy = y + dy;
          const bool v = sx >= 0 && sx < w && sy >= 0 && sy < h && b[sy * w + sx];
          any |= v;
          all &= v;
        }
      }
      out[y * w + x] = dilate ? any : all;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("bitmap round trip and canonical runs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + trial % 13, h = 1 + (trial * 7) % 11;
    const Bitmap b = RandomBitmap(rng, w, h, 0.1 + 0.8 * (trial % 5) / 4.0);
    const BinaryMask m = BinaryMask::FromBitmap(w, h, b);
    CHECK(m.ToBitmap() == b);
    CHECK(m.area() == DenseArea(b));
    uint64_t sum = 0;
    for (size_t i = 0; i < m.runs().size(); ++i) {
      sum += m.runs()[i];
      if (i > 0) CHECK(m.runs()[i] > 0);
    }
    CHECK(sum == static_cast<uint64_t>(w) * h);
    CHECK(BinaryMask::FromRuns(w, h, m.runs()) == m);
  }
}

TEST_CASE("non-canonical runs canonicalize") {
  const BinaryMask a = BinaryMask::FromRuns(3, 2, {1, 2, 0, 1, 2, 0});
  const BinaryMask b = BinaryMask::FromRuns(3, 2, {1, 3, 2});
  CHECK(a == b);
  CHECK(a.area() == 3);
  CHECK(BinaryMask::FromRuns(2, 2, {0, 4}).runs() == std::vector<uint32_t>{0, 4});
  CHECK_THROWS_AS(BinaryMask::FromRuns(2, 2, {1, 2}), MaskError);
}

TEST_CASE("boolean ops agree with dense oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 2 + trial % 17, h = 2 + trial % 9;
    const Bitmap a = RandomBitmap(rng, w, h, 0.4);
    const Bitmap b = RandomBitmap(rng, w, h, 0.5);
    const BinaryMask ma = BinaryMask::FromBitmap(w, h, a);
    const BinaryMask mb = BinaryMask::FromBitmap(w, h, b);
    Bitmap u(a.size()), in(a.size()), d(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      u[i] = a[i] || b[i];
      in[i] = a[i] && b[i];
      d[i] = a[i] && !b[i];
    }
    CHECK(Union(ma, mb).ToBitmap() == u);
    CHECK(Intersection(ma, mb).ToBitmap() == in);
    CHECK(Difference(ma, mb).ToBitmap() == d);
    CHECK(IntersectionArea(ma, mb) == DenseArea(in));
    CHECK(Iou(ma, mb) == doctest::Approx(DenseIou(a, b)).epsilon(1e-15));
  }
}

TEST_CASE("iou edge cases") {
  const BinaryMask e(4, 4);
  CHECK(Iou(e, e) == 0.0);
  const BinaryMask f = BinaryMask::Full(4, 4);
  CHECK(Iou(f, f) == 1.0);
  CHECK(Iou(e, f) == 0.0);
  CHECK_THROWS_AS(Iou(e, BinaryMask(4, 5)), MaskError);
}

TEST_CASE("translate and morphology agree with dense oracle") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 150; ++trial) {
    const int w = 3 + trial % 12, h = 3 + trial % 7;
    const Bitmap a = RandomBitmap(rng, w, h, 0.3 + 0.1 * (trial % 4));
    const BinaryMask m = BinaryMask::FromBitmap(w, h, a);
    const int dx = static_cast<int>(rng() % 9) - 4;
    const int dy = static_cast<int>(rng() % 9) - 4;
    CHECK(Translate(m, dx, dy).ToBitmap() == DenseShift(a, w, h, dx, dy));
    const int r = static_cast<int>(rng() % 3);
    CHECK(Dilate(m, r).ToBitmap() == DenseMorph(a, w, h, r, true));
    CHECK(Erode(m, r).ToBitmap() == DenseMorph(a, w, h, r, false));
  }
}

TEST_CASE("coco counts are column-major") {
  // 2x2 with only (x=1, y=0) set: row-major index 1, column-major index 2.
  const BinaryMask m = BinaryMask::FromBox(2, 2, Box{1, 0, 2, 1});
  CHECK(m.runs() == std::vector<uint32_t>{1, 1, 2});
  CHECK(m.ToCocoCounts() == std::vector<uint32_t>{2, 1, 1});
  const std::vector<uint32_t> counts{2, 1, 1};
  CHECK(BinaryMask::FromCocoCounts(2, 2, counts) == m);

  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + trial % 8, h = 1 + trial % 6;
    const BinaryMask r = BinaryMask::FromBitmap(w, h, RandomBitmap(rng, w, h, 0.5));
    const auto cc = r.ToCocoCounts();
    CHECK(BinaryMask::FromCocoCounts(w, h, cc) == r);
  }
}

TEST_CASE("bounding box") {
  const BinaryMask m = BinaryMask::FromBox(10, 8, Box{2, 3, 7, 5});
  const Box b = m.BoundingBox();
  CHECK(b.x0 == 2);
  CHECK(b.y0 == 3);
  CHECK(b.x1 == 7);
  CHECK(b.y1 == 5);
  CHECK(BinaryMask(3, 3).BoundingBox().empty());
}

TEST_CASE("render non-overlapping: smaller wins, lower id breaks ties") {
  const int w = 10, h = 10;
  Segment big{1, BinaryMask::FromBox(w, h, Box{0, 0, 6, 6}), 1, std::nullopt};
  Segment small{2, BinaryMask::FromBox(w, h, Box{4, 4, 8, 8}), 2, std::nullopt};
  const Segmentation s = RenderNonOverlapping(0, w, h, {big, small});
  CHECK(IsValid(s));
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[0].id == 1);  // input order kept
  CHECK(s.segments[1].mask == small.mask);
  CHECK(s.segments[0].mask.area() == 36 - 4);

  Segment a{5, BinaryMask::FromBox(w, h, Box{0, 0, 4, 4}), {}, {}};
  Segment b{3, BinaryMask::FromBox(w, h, Box{2, 0, 6, 4}), {}, {}};
  const Segmentation t = RenderNonOverlapping(0, w, h, {a, b});
  CHECK(t.Find(3)->mask == b.mask);
  CHECK(t.Find(5)->mask.area() == 8);

  Segment hidden{7, BinaryMask::FromBox(w, h, Box{0, 0, 2, 2}), {}, {}};
  Segment cover{8, BinaryMask::FromBox(w, h, Box{0, 0, 2, 2}), {}, {}};
  const Segmentation u = RenderNonOverlapping(0, w, h, {hidden, cover});
  REQUIRE(u.segments.size() == 1);
  CHECK(u.segments[0].id == 7);
}

TEST_CASE("render output is always valid") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Segment> segs;
    const int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      segs.push_back(Segment{i + 1, RandomBox(rng, 16, 12, 1, 10), {}, {}});
    }
    const Segmentation s = RenderNonOverlapping(3, 16, 12, segs);
    CHECK(IsValid(s));
    CHECK(PairwiseDisjoint(s));
    for (const auto& seg : s.segments) CHECK_FALSE(seg.mask.empty());
  }
}

TEST_CASE("validate rejects overlap, duplicate ids and size mismatch") {
  Segmentation s = EmptySegmentation(0, 4, 4);
  s.segments.push_back({1, BinaryMask::FromBox(4, 4, Box{0, 0, 2, 2}), {}, {}});
  CHECK(IsValid(s));
  s.segments.push_back({2, BinaryMask::FromBox(4, 4, Box{1, 1, 3, 3}), {}, {}});
  CHECK_THROWS_AS(Validate(s), MaskError);
  s.segments.back().mask = BinaryMask::FromBox(4, 4, Box{2, 2, 4, 4});
  CHECK(IsValid(s));
  s.segments.back().id = 1;
  CHECK_FALSE(IsValid(s));
  s.segments.back().id = 2;
  s.segments.back().mask = BinaryMask(5, 4);
  CHECK_FALSE(IsValid(s));
}

TEST_CASE("index map") {
  Segmentation s = EmptySegmentation(0, 3, 1);
  s.segments.push_back({4, BinaryMask::FromBox(3, 1, Box{2, 0, 3, 1}), {}, {}});
  CHECK(ToIndexMap(s) == std::vector<int32_t>{-1, -1, 0});
}
