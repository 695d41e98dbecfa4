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
#include <stdexcept>
#include <string_view>

#include "devafuse/metrics.hpp"
#include "devafuse/motion.hpp"

namespace devafuse {

class SynthError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ShapeFamily { kRectangles, kDisks, kMixed };

std::string_view ShapeFamilyName(ShapeFamily f);
ShapeFamily ParseShapeFamily(std::string_view name);

struct SceneConfig {
  int width = 128;
  int height = 96;
  int num_frames = 60;
  int num_objects = 4;
  int num_classes = 3;
  ShapeFamily shapes = ShapeFamily::kMixed;
  // Rectangle side / disk diameter range, pixels.
  int min_size = 18;
  int max_size = 32;
  // Speed range, pixels per frame.
  double min_speed = 0.5;
  double max_speed = 3.0;
  // Probability that an object is born mid-video rather than at frame 0.
  double late_entry_prob = 0.25;
  // Probability that an object leaves before the last frame.
  double early_exit_prob = 0.0;
  uint64_t seed = 1;

  void Validate() const;
};

struct NoiseConfig {
  double dropout = 0.0;        // per segment-frame
  double spurious_rate = 0.0;  // chance of one spurious segment per frame
  int jitter = 0;              // max boundary perturbation, pixels
  double split = 0.0;          // per segment-frame
  double class_flip = 0.0;     // per segment-frame
  int spurious_min_size = 4;
  int spurious_max_size = 10;

  void Validate() const;
};

struct SyntheticVideo {
  SceneScripts scripts;
  TrackedVideo gt;
};

// Stream seed for one (video, frame) pair; mixing is SplitMix64.
uint64_t StreamSeed(uint64_t seed, uint64_t video, uint64_t frame);

// Objects move in straight lines and bounce off the canvas border. Ground
// truth ids are 1..num_objects; classes are 1..num_classes. Throws
// SynthError when an object cannot fit the canvas.
SyntheticVideo GenerateScene(const SceneConfig& config);

// Simulated image-model errors on one ground-truth frame: per-segment
// dropout, boundary jitter (dilate/erode by up to `jitter` px), splits,
// class flips, and at most one spurious segment placed in free space.
// Surviving segments keep their ids; split halves and spurious segments get
// ids above the frame's maximum. Zero noise returns the input unchanged.
Segmentation Corrupt(const Segmentation& gt, const NoiseConfig& noise,
                     uint64_t seed, int frame_index, int num_classes);

}  // namespace devafuse
