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
#include <set>
#include <vector>

#include "devafuse/segmentation.hpp"

namespace devafuse {

// Per-frame segmentations whose segment ids are track ids. Segments without
// a class label count as class 0.
using TrackedVideo = std::vector<Segmentation>;

// Window size standing for "the whole video".
inline constexpr int kWholeVideo = 0;
inline const std::vector<int> kDefaultWindows = {1, 2, 4, 6, 8, 10,
                                                 kWholeVideo};

struct MetricOptions {
  // Segments of these classes are merged per frame into one region per class
  // before matching, and take no part in association quality.
  std::set<ClassId> stuff_classes;
};

struct StqResult {
  double stq = 0.0;
  double aq = 0.0;
  double sq = 0.0;
};

struct OwtaResult {
  double owta = 0.0;
  double det_re = 0.0;
  double ass_a = 0.0;
};

// All values lie in [0, 1]. Optional values are absent when no class occurs
// in either prediction or ground truth.
struct MetricReport {
  std::optional<double> pq;  // frame-averaged
  std::map<int, std::optional<double>> vpq;  // window -> value
  std::optional<double> vpq_bar;
  StqResult stq;
  OwtaResult owta;
};

// Image panoptic quality: per class, segments match when IoU > 0.5 and
// PQ_c = sum(IoU of matches) / (TP + FP/2 + FN/2); averaged over the classes
// present in either input.
std::optional<double> PanopticQuality(const Segmentation& pred,
                                      const Segmentation& gt,
                                      const MetricOptions& options = {});

// Mean of PanopticQuality over the frames where it is defined.
std::optional<double> MeanFramePq(const TrackedVideo& pred,
                                  const TrackedVideo& gt,
                                  const MetricOptions& options = {});

// Video panoptic quality over sliding windows of `window` frames
// (kWholeVideo for one window spanning everything; a video shorter than the
// window is one truncated window). Each track's masks inside a window form a
// tube whose IoU is the summed intersection over the summed union. PQ is
// computed over tubes per window, class-averaged, and the window values are
// then averaged, so window 1 reproduces MeanFramePq.
std::optional<double> VideoPanopticQuality(const TrackedVideo& pred,
                                           const TrackedVideo& gt, int window,
                                           const MetricOptions& options = {});

// Half the whole-video value plus half the mean over windows 1..10.
// Requires every entry of kDefaultWindows; absent otherwise.
std::optional<double> VpqBar(const std::map<int, std::optional<double>>& vpq);

// SQ is the class-averaged IoU of the semantic maps over the whole video.
// AQ averages, over ground-truth tracks g, (1/|g|) * sum over predicted
// tracks p of |p∩g| * IoU(p, g) with whole-video pixel sets.
StqResult SegmentationTrackingQuality(const TrackedVideo& pred,
                                      const TrackedVideo& gt,
                                      const MetricOptions& options = {});

// HOTA-family open-world tracking accuracy at mask level: per IoU threshold
// 0.05..0.95, frames are matched by Hungarian assignment on alignment-
// weighted IoU; DetRe = TP / (TP + FN) ignores unmatched predictions;
// AssA averages TPA / (TPA + FPA + FNA) over true positives. Reported
// values are means over the thresholds.
OwtaResult OpenWorldTrackingAccuracy(const TrackedVideo& pred,
                                     const TrackedVideo& gt);

MetricReport Evaluate(const TrackedVideo& pred, const TrackedVideo& gt,
                      const std::vector<int>& windows = kDefaultWindows,
                      const MetricOptions& options = {});

}  // namespace devafuse
