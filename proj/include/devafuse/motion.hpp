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

#include <memory>
#include <vector>

#include "devafuse/propagation.hpp"
#include "devafuse/segmentation.hpp"

namespace devafuse {

enum class ShapeKind { kRectangle, kDisk };

struct ShapeDescriptor {
  ShapeKind kind = ShapeKind::kRectangle;
  int width = 0;   // rectangle
  int height = 0;  // rectangle
  int radius = 0;  // disk

  bool operator==(const ShapeDescriptor&) const = default;
};

// Shape center in pixel coordinates plus a uniform scale factor.
struct RigidTransform {
  int x = 0;
  int y = 0;
  double scale = 1.0;

  bool operator==(const RigidTransform&) const = default;
};

// Ground-truth trajectory of one object. `transforms` holds one entry per
// frame of the scene, including frames outside [entry_frame, exit_frame).
struct MotionScript {
  SegmentId object_id = 0;
  ClassId class_label = 0;
  ShapeDescriptor shape;
  int z_order = 0;
  int entry_frame = 0;
  int exit_frame = 0;  // exclusive
  std::vector<RigidTransform> transforms;

  bool ExistsAt(int t) const { return t >= entry_frame && t < exit_frame; }
  bool operator==(const MotionScript&) const = default;
};

// A whole synthetic scene: canvas plus every object's script. Objects with a
// higher z_order occlude lower ones; ties go to the later object.
class SceneScripts {
 public:
  SceneScripts() = default;
  SceneScripts(int width, int height, int num_frames,
               std::vector<MotionScript> objects);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_frames() const { return num_frames_; }
  const std::vector<MotionScript>& objects() const { return objects_; }

  // Full shape footprint ignoring occlusion; empty when the object does not
  // exist at t.
  BinaryMask Amodal(size_t object, int t) const;
  // Union of the footprints of objects drawn in front of `object` at t.
  BinaryMask Occluders(size_t object, int t) const;
  BinaryMask Visible(size_t object, int t) const;
  Segmentation GroundTruth(int t) const;

  bool operator==(const SceneScripts&) const = default;

 private:
  bool InFront(size_t a, size_t b) const;

  int width_ = 0;
  int height_ = 0;
  int num_frames_ = 0;
  std::vector<MotionScript> objects_;
};

BinaryMask Rasterize(const ShapeDescriptor& shape, const RigidTransform& tf,
                     int width, int height);

// Moves memorized masks with the ground-truth motion of the object they
// cover most at their source frame. Parts of that object hidden at the
// source frame are restored before the move, and whatever is in front of it
// at the query frame is cut away, so noise-free masks propagate exactly.
// Masks that cover no object stay where they are.
class MotionOraclePropagator final : public MemoryPropagator {
 public:
  explicit MotionOraclePropagator(std::shared_ptr<const SceneScripts> scene);

  std::unique_ptr<Propagator> Fresh() const override;
  std::string Name() const override { return "oracle"; }

  BinaryMask Move(const BinaryMask& mask, int from_frame, int to_frame) const;

 protected:
  BinaryMask Transport(const PropagatorMemory::Entry& entry,
                       int query_frame) const override;

 private:
  std::shared_ptr<const SceneScripts> scene_;
};

}  // namespace devafuse
