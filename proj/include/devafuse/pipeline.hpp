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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "devafuse/association.hpp"
#include "devafuse/consensus.hpp"
#include "devafuse/propagation.hpp"

namespace devafuse {

enum class PipelineMode {
  kOnline,
  kSemiOnline,
  kOfflineSoft,
  kMaskIouBaseline,
  kShortTrack,
  kTrustImageSeg,
};

std::string_view ModeName(PipelineMode mode);
// Throws std::invalid_argument for unknown names.
PipelineMode ParseMode(std::string_view name);

struct PipelineConfig {
  int clip_size = 3;
  int merge_period = 5;
  double alpha = 0.5;
  double iou_threshold = 0.5;
  int deletion_limit = 5;
  PipelineMode mode = PipelineMode::kSemiOnline;
  bool spatial_alignment = true;
  int exact_cap = 24;

  // Defaults for `mode`; online mode uses single-frame clips.
  static PipelineConfig ForMode(PipelineMode mode);
  // Throws std::invalid_argument on a violated invariant.
  void Validate() const;
  ConsensusConfig consensus() const;
};

// Per-frame image segmentation provider. Get() may throw to signal a failed
// frame.
class SegmentationSource {
 public:
  virtual ~SegmentationSource() = default;
  virtual int num_frames() const = 0;
  virtual int width() const = 0;
  virtual int height() const = 0;
  virtual Segmentation Get(int frame) = 0;
};

class VectorSource final : public SegmentationSource {
 public:
  explicit VectorSource(std::vector<Segmentation> frames);
  int num_frames() const override { return static_cast<int>(frames_.size()); }
  int width() const override { return width_; }
  int height() const override { return height_; }
  Segmentation Get(int frame) override { return frames_.at(frame); }

 private:
  std::vector<Segmentation> frames_;
  int width_ = 0;
  int height_ = 0;
};

struct PipelineResult {
  std::vector<Segmentation> frames;
  TrackTable tracks;
  std::vector<int> merge_frames;
  std::vector<std::string> warnings;
};

// Initializes from consensus at frame 0, propagates in between, and merges
// a fresh clip consensus every merge_period frames. Output ids are track
// ids. Covers the online, semi_online, short_track and trust_image_seg
// modes; mask_iou_baseline is dispatched to RunMaskIouBaseline.
PipelineResult RunPipeline(SegmentationSource& source, Propagator& propagator,
                           const PipelineConfig& config);

// Tracking-by-detection: every frame's detections are linked to the
// previous output by IoU > threshold; unmatched detections start tracks.
PipelineResult RunMaskIouBaseline(SegmentationSource& source,
                                  double iou_threshold = 0.5);

// --- offline soft-probability consensus ---

struct SoftFrame {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  std::vector<float> prob;  // row-major, values in [0, 1]
  double confidence = 0.0;
};

struct SoftConsensusResult {
  size_t keyframe = 0;  // position within the input span
  std::vector<double> weights;
  std::vector<float> consensus;
};

// Keyframe is the most confident frame (first on ties); weights are the
// softmax of the confidences; the consensus is the weighted map sum.
SoftConsensusResult SoftConsensus(std::span<const SoftFrame> frames);

// `count` frame indices spread uniformly over [0, video_length).
std::vector<int> UniformFrameIndices(int video_length, int count = 10);

struct OfflineSoftResult {
  int keyframe = 0;  // frame index
  std::vector<BinaryMask> masks;
  std::vector<std::string> warnings;
};

// Thresholds the soft consensus at 0.5 and propagates it forward to the end
// and backward to the start without further image segmentations. The
// propagator memory is refreshed with its own output every
// `memory_period` frames.
OfflineSoftResult RunOfflineSoft(std::span<const SoftFrame> frames,
                                 int video_length,
                                 const Propagator& prototype,
                                 int memory_period = 5);

// Runs RunOfflineSoft per object and fuses overlaps by argmax of each
// object's keyframe confidence (lower object index on ties). Object k gets
// id k + 1.
std::vector<Segmentation> RunOfflineSoftMulti(
    std::span<const std::vector<SoftFrame>> objects, int video_length,
    const Propagator& prototype);

}  // namespace devafuse
