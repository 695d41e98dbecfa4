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

#include "devafuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace devafuse {
namespace {

constexpr uint64_t kNoiseStream = 0x6e6f697365ull;  // "noise"

void CheckProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw SynthError(std::string(name) + " must lie in [0, 1], got " +
                     std::to_string(p));
  }
}

// Legal range of a shape's center along one axis.
struct Extent {
  int lo = 0;
  int hi = 0;
};

Extent CenterRange(const ShapeDescriptor& shape, int canvas, bool horizontal) {
  if (shape.kind == ShapeKind::kRectangle) {
    const int side = horizontal ? shape.width : shape.height;
    return Extent{side / 2, canvas - side + side / 2};
  }
  return Extent{shape.radius, canvas - 1 - shape.radius};
}

// Reflects a coordinate moving with velocity v into [lo, hi].
void Bounce(double& x, double& v, double lo, double hi) {
  if (hi <= lo) {
    x = lo;
    return;
  }
  for (int guard = 0; guard < 8 && (x < lo || x > hi); ++guard) {
    if (x < lo) {
      x = 2 * lo - x;
      v = -v;
    } else if (x > hi) {
      x = 2 * hi - x;
      v = -v;
    }
  }
  x = std::clamp(x, lo, hi);
}

std::vector<Segment> SplitInHalf(const Segment& s, SegmentId second_id) {
  const Box b = s.mask.BoundingBox();
  const int w = s.mask.width();
  const int h = s.mask.height();
  Box first_half = b;
  if (b.x1 - b.x0 >= b.y1 - b.y0) {
    first_half.x1 = (b.x0 + b.x1) / 2;
  } else {
    first_half.y1 = (b.y0 + b.y1) / 2;
  }
  const BinaryMask cut = BinaryMask::FromBox(w, h, first_half);
  Segment a = s;
  a.mask = Intersection(s.mask, cut);
  Segment c = s;
  c.id = second_id;
  c.mask = Difference(s.mask, cut);
  std::vector<Segment> out;
  if (!a.mask.empty()) out.push_back(std::move(a));
  if (!c.mask.empty()) out.push_back(std::move(c));
  return out;
}

}  // namespace

std::string_view ShapeFamilyName(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::kRectangles:
      return "rectangles";
    case ShapeFamily::kDisks:
      return "disks";
    case ShapeFamily::kMixed:
      return "mixed";
  }
  return "mixed";
}

ShapeFamily ParseShapeFamily(std::string_view name) {
  if (name == "rectangles") return ShapeFamily::kRectangles;
  if (name == "disks") return ShapeFamily::kDisks;
  if (name == "mixed") return ShapeFamily::kMixed;
  throw SynthError("unknown shape family '" + std::string(name) + "'");
}

void SceneConfig::Validate() const {
  if (width < 1 || height < 1) throw SynthError("canvas must be non-empty");
  if (num_frames < 1) throw SynthError("num_frames must be >= 1");
  if (num_objects < 0) throw SynthError("num_objects must be >= 0");
  if (num_classes < 1) throw SynthError("num_classes must be >= 1");
  if (min_size < 1 || max_size < min_size) {
    throw SynthError("size range must satisfy 1 <= min_size <= max_size");
  }
  if (max_size > width || max_size > height) {
    throw SynthError("objects up to " + std::to_string(max_size) +
                     " px cannot fit a " + std::to_string(width) + "x" +
                     std::to_string(height) + " canvas");
  }
  if (min_speed < 0.0 || max_speed < min_speed) {
    throw SynthError("speed range must satisfy 0 <= min_speed <= max_speed");
  }
  CheckProbability(late_entry_prob, "late_entry_prob");
  CheckProbability(early_exit_prob, "early_exit_prob");
}

void NoiseConfig::Validate() const {
  CheckProbability(dropout, "dropout");
  CheckProbability(spurious_rate, "spurious_rate");
  CheckProbability(split, "split");
  CheckProbability(class_flip, "class_flip");
  if (jitter < 0) throw SynthError("jitter must be >= 0");
  if (spurious_min_size < 1 || spurious_max_size < spurious_min_size) {
    throw SynthError("spurious size range is invalid");
  }
}

uint64_t StreamSeed(uint64_t seed, uint64_t video, uint64_t frame) {
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ video) ^ frame);
}

SyntheticVideo GenerateScene(const SceneConfig& config) {
  config.Validate();
  std::mt19937_64 rng(StreamSeed(config.seed, 0, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const int T = config.num_frames;

  std::vector<MotionScript> objects;
  for (int k = 0; k < config.num_objects; ++k) {
    MotionScript o;
    o.object_id = k + 1;
    o.class_label = uniform_int(1, config.num_classes);
    bool disk = config.shapes == ShapeFamily::kDisks;
    if (config.shapes == ShapeFamily::kMixed) disk = unit(rng) < 0.5;
    if (disk) {
      o.shape.kind = ShapeKind::kDisk;
      o.shape.radius = uniform_int(config.min_size, config.max_size) / 2;
    } else {
      o.shape.kind = ShapeKind::kRectangle;
      o.shape.width = uniform_int(config.min_size, config.max_size);
      o.shape.height = uniform_int(config.min_size, config.max_size);
    }
    const Extent ex = CenterRange(o.shape, config.width, true);
    const Extent ey = CenterRange(o.shape, config.height, false);
    if (ex.hi < ex.lo || ey.hi < ey.lo) {
      throw SynthError("object " + std::to_string(o.object_id) +
                       " does not fit the " + std::to_string(config.width) +
                       "x" + std::to_string(config.height) + " canvas");
    }
    o.z_order = k;
    o.entry_frame = 0;
    if (T > 2 && unit(rng) < config.late_entry_prob) {
      o.entry_frame = uniform_int(1, std::max(1, T / 2));
    }
    o.exit_frame = T;
    if (unit(rng) < config.early_exit_prob) {
      const int earliest = std::min(T, o.entry_frame + std::max(1, T / 4));
      o.exit_frame = uniform_int(earliest, T);
    }

    double x = ex.lo + unit(rng) * (ex.hi - ex.lo);
    double y = ey.lo + unit(rng) * (ey.hi - ey.lo);
    const double speed =
        config.min_speed + unit(rng) * (config.max_speed - config.min_speed);
    const double angle = unit(rng) * 2.0 * std::numbers::pi;
    double vx = speed * std::cos(angle);
    double vy = speed * std::sin(angle);
    o.transforms.reserve(T);
    for (int t = 0; t < T; ++t) {
      o.transforms.push_back(RigidTransform{static_cast<int>(std::lround(x)),
                                            static_cast<int>(std::lround(y)),
                                            1.0});
      x += vx;
      y += vy;
      Bounce(x, vx, ex.lo, ex.hi);
      Bounce(y, vy, ey.lo, ey.hi);
    }
    objects.push_back(std::move(o));
  }
  // Random depth order.
  std::vector<int> depth(objects.size());
  for (size_t i = 0; i < depth.size(); ++i) depth[i] = static_cast<int>(i);
  std::shuffle(depth.begin(), depth.end(), rng);
  for (size_t i = 0; i < objects.size(); ++i) objects[i].z_order = depth[i];

  SyntheticVideo video;
  video.scripts =
      SceneScripts(config.width, config.height, T, std::move(objects));
  video.gt.reserve(T);
  for (int t = 0; t < T; ++t) video.gt.push_back(video.scripts.GroundTruth(t));
  return video;
}

Segmentation Corrupt(const Segmentation& gt, const NoiseConfig& noise,
                     uint64_t seed, int frame_index, int num_classes) {
  noise.Validate();
  std::mt19937_64 rng(StreamSeed(seed, kNoiseStream, frame_index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  SegmentId next_id = 1;
  for (const auto& s : gt.segments) next_id = std::max(next_id, s.id + 1);

  std::vector<Segment> kept;
  for (const auto& s : gt.segments) {
    // Draw every variate so one knob does not shift the others' streams.
    const double u_drop = unit(rng);
    const int radius = uniform_int(-noise.jitter, noise.jitter);
    const double u_split = unit(rng);
    const double u_flip = unit(rng);
    const int flip_to = num_classes > 1 ? uniform_int(1, num_classes - 1) : 0;
    if (u_drop < noise.dropout) continue;

    Segment out = s;
    if (radius > 0) {
      out.mask = Dilate(s.mask, radius);
    } else if (radius < 0) {
      BinaryMask eroded = Erode(s.mask, -radius);
      if (!eroded.empty()) out.mask = std::move(eroded);
    }
    if (u_flip < noise.class_flip && num_classes > 1 && s.class_label) {
      // Shift into the other classes 1..num_classes, skipping the original.
      ClassId c = flip_to;
      if (c >= *s.class_label) ++c;
      out.class_label = c;
    }
    if (u_split < noise.split) {
      for (auto& part : SplitInHalf(out, next_id)) kept.push_back(std::move(part));
      ++next_id;
    } else {
      kept.push_back(std::move(out));
    }
  }
  Segmentation result =
      RenderNonOverlapping(gt.frame_index, gt.width, gt.height, std::move(kept));

  const double u_spurious = unit(rng);
  if (u_spurious < noise.spurious_rate) {
    BinaryMask occupied(gt.width, gt.height);
    for (const auto& s : result.segments) occupied = Union(occupied, s.mask);
    for (const auto& s : gt.segments) occupied = Union(occupied, s.mask);
    for (int attempt = 0; attempt < 32; ++attempt) {
      const int w = uniform_int(noise.spurious_min_size, noise.spurious_max_size);
      const int h = uniform_int(noise.spurious_min_size, noise.spurious_max_size);
      if (w > gt.width || h > gt.height) break;
      const int x0 = uniform_int(0, gt.width - w);
      const int y0 = uniform_int(0, gt.height - h);
      BinaryMask m =
          BinaryMask::FromBox(gt.width, gt.height, Box{x0, y0, x0 + w, y0 + h});
      if (IntersectionArea(m, occupied) != 0) continue;
      const ClassId cls = static_cast<ClassId>(uniform_int(1, std::max(1, num_classes)));
      result.segments.push_back(
          Segment{next_id++, std::move(m), cls, 0.3 + 0.4 * unit(rng)});
      break;
    }
  }
  return result;
}

}  // namespace devafuse
