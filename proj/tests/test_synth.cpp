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

#include <cmath>

#include "devafuse/synth.hpp"
#include "oracles.hpp"

using namespace devafuse;
using namespace devafuse::testing;

namespace {

SceneConfig Small(uint64_t seed) {
  SceneConfig c;
  c.width = 64;
  c.height = 48;
  c.num_frames = 30;
  c.num_objects = 4;
  c.min_size = 8;
  c.max_size = 16;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("scenes are deterministic and seed dependent") {
  const SyntheticVideo a = GenerateScene(Small(3));
  const SyntheticVideo b = GenerateScene(Small(3));
  const SyntheticVideo c = GenerateScene(Small(4));
  CHECK(a.gt == b.gt);
  CHECK(a.gt != c.gt);
  CHECK(StreamSeed(1, 2, 3) == StreamSeed(1, 2, 3));
  CHECK(StreamSeed(1, 2, 3) != StreamSeed(1, 3, 2));
}

TEST_CASE("ground truth frames are valid and match the scripts") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    SceneConfig cfg = Small(seed);
    cfg.early_exit_prob = 0.3;
    const SyntheticVideo v = GenerateScene(cfg);
    REQUIRE(static_cast<int>(v.gt.size()) == cfg.num_frames);
    for (int t = 0; t < cfg.num_frames; ++t) {
      const Segmentation& f = v.gt[t];
      CHECK(f.frame_index == t);
      CHECK(IsValid(f));
      CHECK(PairwiseDisjoint(f));
      CHECK(f == v.scripts.GroundTruth(t));
      for (const auto& s : f.segments) {
        CHECK(s.id >= 1);
        CHECK(s.id <= static_cast<SegmentId>(cfg.num_objects));
        REQUIRE(s.class_label.has_value());
        CHECK(*s.class_label >= 1);
        CHECK(*s.class_label <= cfg.num_classes);
      }
    }
  }
}

TEST_CASE("a static object stays put") {
  SceneConfig cfg = Small(1);
  cfg.num_objects = 1;
  cfg.min_speed = cfg.max_speed = 0.0;
  cfg.late_entry_prob = 0.0;
  cfg.shapes = ShapeFamily::kRectangles;
  const SyntheticVideo v = GenerateScene(cfg);
  for (const auto& f : v.gt) {
    REQUIRE(f.segments.size() == 1);
    CHECK(f.segments[0].mask == v.gt[0].segments[0].mask);
  }
}

TEST_CASE("objects that cannot fit are rejected") {
  SceneConfig cfg = Small(1);
  cfg.max_size = 200;
  CHECK_THROWS_AS(GenerateScene(cfg), SynthError);
  SceneConfig bad = Small(1);
  bad.min_size = 20;
  bad.max_size = 10;
  CHECK_THROWS_AS(bad.Validate(), SynthError);
  NoiseConfig n;
  n.dropout = 1.5;
  CHECK_THROWS_AS(n.Validate(), SynthError);
  CHECK(ParseShapeFamily(ShapeFamilyName(ShapeFamily::kDisks)) == ShapeFamily::kDisks);
  CHECK_THROWS(ParseShapeFamily("hexagons"));
}

TEST_CASE("zero noise is the identity") {
  const SyntheticVideo v = GenerateScene(Small(5));
  for (const auto& f : v.gt) CHECK(Corrupt(f, NoiseConfig{}, 9, f.frame_index, 3) == f);
}

TEST_CASE("full dropout removes every ground truth segment") {
  const SyntheticVideo v = GenerateScene(Small(6));
  NoiseConfig n;
  n.dropout = 1.0;
  for (const auto& f : v.gt) CHECK(Corrupt(f, n, 9, f.frame_index, 3).segments.empty());
}

TEST_CASE("spurious rate matches its expectation") {
  const SyntheticVideo v = GenerateScene(Small(7));
  NoiseConfig n;
  n.spurious_rate = 0.3;
  const int frames = 1000;
  int spurious = 0;
  for (int t = 0; t < frames; ++t) {
    const Segmentation& f = v.gt[t % v.gt.size()];
    const Segmentation out = Corrupt(f, n, 11, t, 3);
    CHECK(IsValid(out));
    CHECK(out.segments.size() <= f.segments.size() + 1);
    for (const auto& s : out.segments) {
      if (f.Find(s.id) == nullptr) {
        ++spurious;
        // Placed in free space.
        for (const auto& g : f.segments) CHECK(IntersectionArea(s.mask, g.mask) == 0);
      }
    }
  }
  const double mean = frames * 0.3;
  const double sigma = std::sqrt(frames * 0.3 * 0.7);
  CHECK(std::abs(spurious - mean) < 3.0 * sigma);
}

TEST_CASE("noisy frames stay valid and keep ids") {
  NoiseConfig n;
  n.dropout = 0.2;
  n.jitter = 2;
  n.split = 0.2;
  n.class_flip = 0.2;
  n.spurious_rate = 0.5;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticVideo v = GenerateScene(Small(seed));
    for (const auto& f : v.gt) {
      const Segmentation a = Corrupt(f, n, seed, f.frame_index, 3);
      const Segmentation b = Corrupt(f, n, seed, f.frame_index, 3);
      CHECK(a == b);
      CHECK(IsValid(a));
      CHECK(PairwiseDisjoint(a));
      SegmentId max_gt = 0;
      for (const auto& s : f.segments) max_gt = std::max(max_gt, s.id);
      for (const auto& s : a.segments) {
        CHECK_FALSE(s.mask.empty());
        if (s.id <= max_gt) CHECK(f.Find(s.id) != nullptr);
      }
    }
  }
}

TEST_CASE("jitter changes boundaries by at most the configured radius") {
  const SyntheticVideo v = GenerateScene(Small(8));
  NoiseConfig n;
  n.jitter = 1;
  for (const auto& f : v.gt) {
    const Segmentation out = Corrupt(f, n, 4, f.frame_index, 3);
    for (const auto& s : out.segments) {
      const Segment* g = f.Find(s.id);
      REQUIRE(g != nullptr);
      const Bitmap sb = Dense(s.mask);
      const Bitmap gb = Dense(g->mask);
      const int w = f.width;
      // Every gained pixel neighbours the original mask.
      for (size_t p = 0; p < sb.size(); ++p) {
        if (!sb[p] || gb[p]) continue;
        const int x = static_cast<int>(p) % w;
        const int y = static_cast<int>(p) / w;
        bool near = false;
        for (int dy = -1; dy <= 1 && !near; ++dy) {
          for (int dx = -1; dx <= 1 && !near; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= f.height) continue;
            near = gb[ny * w + nx] != 0;
          }
        }
        CHECK(near);
      }
    }
  }
}
