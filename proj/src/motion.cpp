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

#include "devafuse/motion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace devafuse {

BinaryMask Rasterize(const ShapeDescriptor& shape, const RigidTransform& tf,
                     int width, int height) {
  switch (shape.kind) {
    case ShapeKind::kRectangle: {
      const int w = std::max(1, static_cast<int>(std::lround(shape.width * tf.scale)));
      const int h = std::max(1, static_cast<int>(std::lround(shape.height * tf.scale)));
      const int x0 = tf.x - w / 2;
      const int y0 = tf.y - h / 2;
      return BinaryMask::FromBox(width, height, Box{x0, y0, x0 + w, y0 + h});
    }
    case ShapeKind::kDisk: {
      const double r = shape.radius * tf.scale;
      const double r2 = r * r;
      const int reach = static_cast<int>(std::ceil(r));
      std::vector<uint8_t> bitmap(static_cast<size_t>(width) * height, 0);
      for (int y = std::max(0, tf.y - reach);
           y <= std::min(height - 1, tf.y + reach); ++y) {
        for (int x = std::max(0, tf.x - reach);
             x <= std::min(width - 1, tf.x + reach); ++x) {
          const double dx = x - tf.x;
          const double dy = y - tf.y;
          if (dx * dx + dy * dy <= r2) {
            bitmap[static_cast<size_t>(y) * width + x] = 1;
          }
        }
      }
      return BinaryMask::FromBitmap(width, height, bitmap);
    }
  }
  throw std::logic_error("unknown shape kind");
}

SceneScripts::SceneScripts(int width, int height, int num_frames,
                           std::vector<MotionScript> objects)
    : width_(width),
      height_(height),
      num_frames_(num_frames),
      objects_(std::move(objects)) {
  for (const auto& o : objects_) {
    if (static_cast<int>(o.transforms.size()) != num_frames_) {
      throw std::invalid_argument(
          "object " + std::to_string(o.object_id) + " has " +
          std::to_string(o.transforms.size()) + " transforms for a " +
          std::to_string(num_frames_) + "-frame scene");
    }
  }
}

bool SceneScripts::InFront(size_t a, size_t b) const {
  if (objects_[a].z_order != objects_[b].z_order) {
    return objects_[a].z_order > objects_[b].z_order;
  }
  return a > b;
}

BinaryMask SceneScripts::Amodal(size_t object, int t) const {
  const auto& o = objects_.at(object);
  if (!o.ExistsAt(t) || t < 0 || t >= num_frames_) {
    return BinaryMask(width_, height_);
  }
  return Rasterize(o.shape, o.transforms[t], width_, height_);
}

BinaryMask SceneScripts::Occluders(size_t object, int t) const {
  BinaryMask acc(width_, height_);
  for (size_t k = 0; k < objects_.size(); ++k) {
    if (k == object || !objects_[k].ExistsAt(t) || !InFront(k, object)) {
      continue;
    }
    acc = Union(acc, Amodal(k, t));
  }
  return acc;
}

BinaryMask SceneScripts::Visible(size_t object, int t) const {
  return Difference(Amodal(object, t), Occluders(object, t));
}

Segmentation SceneScripts::GroundTruth(int t) const {
  Segmentation seg = EmptySegmentation(t, width_, height_);
  for (size_t k = 0; k < objects_.size(); ++k) {
    BinaryMask v = Visible(k, t);
    if (v.empty()) continue;
    seg.segments.push_back(
        Segment{objects_[k].object_id, std::move(v), objects_[k].class_label,
                1.0});
  }
  return seg;
}

MotionOraclePropagator::MotionOraclePropagator(
    std::shared_ptr<const SceneScripts> scene)
    : scene_(std::move(scene)) {
  if (!scene_) throw std::invalid_argument("oracle propagator needs a scene");
}

std::unique_ptr<Propagator> MotionOraclePropagator::Fresh() const {
  return std::make_unique<MotionOraclePropagator>(scene_);
}

BinaryMask MotionOraclePropagator::Move(const BinaryMask& mask, int from_frame,
                                        int to_frame) const {
  const auto& scene = *scene_;
  if (mask.empty() || from_frame == to_frame) return mask;

  size_t owner = scene.objects().size();
  int64_t best = 0;
  for (size_t k = 0; k < scene.objects().size(); ++k) {
    if (!scene.objects()[k].ExistsAt(from_frame)) continue;
    const int64_t overlap =
        IntersectionArea(mask, scene.Visible(k, from_frame));
    if (overlap > best) {
      best = overlap;
      owner = k;
    }
  }
  if (owner == scene.objects().size()) return mask;  // background: static
  const auto& script = scene.objects()[owner];
  if (!script.ExistsAt(to_frame)) return BinaryMask(mask.width(), mask.height());

  const BinaryMask hidden = Difference(scene.Amodal(owner, from_frame),
                                       scene.Visible(owner, from_frame));
  const BinaryMask source = Union(mask, hidden);
  const RigidTransform& a = script.transforms[from_frame];
  const RigidTransform& b = script.transforms[to_frame];

  BinaryMask moved;
  if (a.scale == b.scale) {
    moved = Translate(source, b.x - a.x, b.y - a.y);
  } else {
    // Inverse-map each destination pixel center into the source.
    const int w = mask.width();
    const int h = mask.height();
    const auto src = source.ToBitmap();
    std::vector<uint8_t> dst(src.size(), 0);
    const double ratio = a.scale / b.scale;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const long sx = std::lround(std::floor(a.x + (x + 0.5 - b.x) * ratio));
        const long sy = std::lround(std::floor(a.y + (y + 0.5 - b.y) * ratio));
        if (sx >= 0 && sy >= 0 && sx < w && sy < h &&
            src[static_cast<size_t>(sy) * w + sx]) {
          dst[static_cast<size_t>(y) * w + x] = 1;
        }
      }
    }
    moved = BinaryMask::FromBitmap(w, h, dst);
  }
  return Difference(moved, scene.Occluders(owner, to_frame));
}

BinaryMask MotionOraclePropagator::Transport(
    const PropagatorMemory::Entry& entry, int query_frame) const {
  return Move(entry.segment.mask, entry.frame_index, query_frame);
}

}  // namespace devafuse
