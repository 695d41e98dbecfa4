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

#include "devafuse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "devafuse/log.hpp"

namespace devafuse {
namespace {

constexpr std::pair<PipelineMode, std::string_view> kModeNames[] = {
    {PipelineMode::kOnline, "online"},
    {PipelineMode::kSemiOnline, "semi_online"},
    {PipelineMode::kOfflineSoft, "offline_soft"},
    {PipelineMode::kMaskIouBaseline, "mask_iou_baseline"},
    {PipelineMode::kShortTrack, "short_track"},
    {PipelineMode::kTrustImageSeg, "trust_image_seg"},
};

void Warn(PipelineResult& result, std::string message) {
  Log().warn("{}", message);
  result.warnings.push_back(std::move(message));
}

// Fills in the voted label and confidence of each output segment.
void ApplyTrackLabels(Segmentation& seg, const TrackTable& tracks) {
  for (auto& s : seg.segments) {
    if (const Track* t = tracks.Find(s.id)) {
      s.class_label = t->label;
      s.confidence = t->confidence;
    }
  }
}

void DropEmpty(Segmentation& seg) {
  std::erase_if(seg.segments, [](const Segment& s) { return s.mask.empty(); });
}

}  // namespace

std::string_view ModeName(PipelineMode mode) {
  for (const auto& [m, name] : kModeNames) {
    if (m == mode) return name;
  }
  return "unknown";
}

PipelineMode ParseMode(std::string_view name) {
  for (const auto& [m, n] : kModeNames) {
    if (n == name) return m;
  }
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

PipelineConfig PipelineConfig::ForMode(PipelineMode mode) {
  PipelineConfig cfg;
  cfg.mode = mode;
  if (mode == PipelineMode::kOnline) cfg.clip_size = 1;
  return cfg;
}

void PipelineConfig::Validate() const {
  if (clip_size < 1) throw std::invalid_argument("clip_size must be >= 1");
  if (merge_period < 1) {
    throw std::invalid_argument("merge_period must be >= 1");
  }
  if (deletion_limit < 1) {
    throw std::invalid_argument("deletion_limit must be >= 1");
  }
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw std::invalid_argument("iou_threshold must lie in (0, 1)");
  }
  if (exact_cap < 1 || exact_cap > 32) {
    throw std::invalid_argument("exact_cap must lie in [1, 32]");
  }
  if (mode == PipelineMode::kOnline && clip_size != 1) {
    throw std::invalid_argument("online mode requires clip_size == 1");
  }
}

ConsensusConfig PipelineConfig::consensus() const {
  ConsensusConfig c;
  c.alpha = alpha;
  c.theta = iou_threshold;
  c.exact_cap = exact_cap;
  c.spatial_alignment = spatial_alignment;
  return c;
}

VectorSource::VectorSource(std::vector<Segmentation> frames)
    : frames_(std::move(frames)) {
  if (!frames_.empty()) {
    width_ = frames_.front().width;
    height_ = frames_.front().height;
  }
}

PipelineResult RunPipeline(SegmentationSource& source, Propagator& propagator,
                           const PipelineConfig& config) {
  config.Validate();
  if (config.mode == PipelineMode::kMaskIouBaseline) {
    return RunMaskIouBaseline(source, config.iou_threshold);
  }
  if (config.mode == PipelineMode::kOfflineSoft) {
    throw std::invalid_argument(
        "offline_soft runs on soft probability maps; use RunOfflineSoft");
  }
  const int num_frames = source.num_frames();
  if (num_frames < 1) throw std::invalid_argument("video has no frames");
  const int w = source.width();
  const int h = source.height();

  PipelineResult result;
  std::map<int, std::optional<Segmentation>> cache;
  auto fetch = [&](int t) -> const std::optional<Segmentation>& {
    auto it = cache.find(t);
    if (it != cache.end()) return it->second;
    std::optional<Segmentation> seg;
    try {
      seg = source.Get(t);
      Validate(*seg);
    } catch (const std::exception& e) {
      Warn(result, "frame " + std::to_string(t) +
                       ": image segmentation unavailable (" + e.what() + ")");
      seg.reset();
    }
    return cache.emplace(t, std::move(seg)).first->second;
  };

  const ConsensusConfig consensus_cfg = config.consensus();
  MergeOptions merge_options;
  merge_options.drop_unmatched_propagated =
      config.mode == PipelineMode::kTrustImageSeg;

  for (int t = 0; t < num_frames; ++t) {
    cache.erase(cache.begin(), cache.lower_bound(t));
    Segmentation out = EmptySegmentation(t, w, h);
    std::vector<SegmentId> purge;

    const bool merge_frame = t % config.merge_period == 0;
    std::optional<Segmentation> consensus;
    if (merge_frame) {
      std::vector<Segmentation> clip;
      const int last = std::min(t + config.clip_size - 1, num_frames - 1);
      bool complete = true;
      for (int k = t; k <= last && complete; ++k) {
        const auto& seg = fetch(k);
        if (seg) {
          clip.push_back(*seg);
        } else {
          complete = false;
        }
      }
      if (complete) {
        result.merge_frames.push_back(t);
        consensus = Consensus(clip, &propagator, consensus_cfg);
      } else {
        Warn(result, "frame " + std::to_string(t) +
                         ": skipping merge, propagating only");
      }
    }

    Segmentation propagated = propagator.HasMemory()
                                  ? propagator.Propagate(t)
                                  : EmptySegmentation(t, w, h);
    if (consensus) {
      const Association assoc =
          MatchSegments(propagated, *consensus, config.iou_threshold);
      MergeResult merged = Merge(propagated, *consensus, assoc, result.tracks,
                                 merge_options);
      std::vector<SegmentId> matched = merged.new_tracks;
      for (const auto& [i, j] : assoc.pairs) {
        matched.push_back(propagated.segments[i].id);
      }
      for (const auto& [old_id, new_id] : merged.rekeyed) {
        std::replace(matched.begin(), matched.end(), old_id, new_id);
        purge.push_back(old_id);
      }
      const LifecycleResult life =
          UpdateLifecycle(result.tracks, matched, config.deletion_limit);
      purge.insert(purge.end(), life.deleted.begin(), life.deleted.end());
      out = std::move(merged.merged);
    } else {
      out = std::move(propagated);
      DropEmpty(out);
    }
    ApplyTrackLabels(out, result.tracks);

    if (config.mode == PipelineMode::kShortTrack) propagator.Reset();
    propagator.Update(out);
    if (!purge.empty()) propagator.Remove(purge);
    result.frames.push_back(std::move(out));
  }
  return result;
}

PipelineResult RunMaskIouBaseline(SegmentationSource& source,
                                  double iou_threshold) {
  const int num_frames = source.num_frames();
  if (num_frames < 1) throw std::invalid_argument("video has no frames");
  PipelineResult result;
  Segmentation previous = EmptySegmentation(-1, source.width(), source.height());
  for (int t = 0; t < num_frames; ++t) {
    Segmentation detections;
    try {
      detections = source.Get(t);
      Validate(detections);
    } catch (const std::exception& e) {
      Warn(result, "frame " + std::to_string(t) +
                       ": image segmentation unavailable (" + e.what() + ")");
      detections = EmptySegmentation(t, source.width(), source.height());
    }
    detections.frame_index = t;
    DropEmpty(detections);
    const Association assoc =
        MatchSegments(previous, detections, iou_threshold);
    std::vector<SegmentId> ids(detections.segments.size(), 0);
    for (const auto& [i, j] : assoc.pairs) ids[j] = previous.segments[i].id;
    for (int j : assoc.unmatched_c) {
      const auto& d = detections.segments[j];
      ids[j] = result.tracks.Create(t, d.class_label, d.confidence).track_id;
    }
    for (size_t j = 0; j < ids.size(); ++j) detections.segments[j].id = ids[j];
    result.merge_frames.push_back(t);
    previous = detections;
    result.frames.push_back(std::move(detections));
  }
  return result;
}

SoftConsensusResult SoftConsensus(std::span<const SoftFrame> frames) {
  if (frames.empty()) throw std::invalid_argument("soft consensus needs frames");
  const size_t pixels = frames.front().prob.size();
  SoftConsensusResult out;
  double top = frames.front().confidence;
  for (size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].prob.size() != pixels) {
      throw std::invalid_argument("soft frames differ in size");
    }
    if (frames[i].confidence > top) {
      top = frames[i].confidence;
      out.keyframe = i;
    }
  }
  // Shift by the maximum for a stable softmax.
  double total = 0.0;
  out.weights.resize(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    out.weights[i] = std::exp(frames[i].confidence - top);
    total += out.weights[i];
  }
  for (double& w : out.weights) w /= total;
  std::vector<double> acc(pixels, 0.0);
  for (size_t i = 0; i < frames.size(); ++i) {
    for (size_t p = 0; p < pixels; ++p) acc[p] += out.weights[i] * frames[i].prob[p];
  }
  out.consensus.assign(acc.begin(), acc.end());
  return out;
}

std::vector<int> UniformFrameIndices(int video_length, int count) {
  if (video_length < 1) throw std::invalid_argument("empty video");
  std::vector<int> idx;
  const int n = std::min(count, video_length);
  for (int i = 0; i < n; ++i) {
    const int t = n == 1 ? 0
                         : static_cast<int>(std::lround(
                               static_cast<double>(i) * (video_length - 1) /
                               (n - 1)));
    if (idx.empty() || idx.back() != t) idx.push_back(t);
  }
  return idx;
}

OfflineSoftResult RunOfflineSoft(std::span<const SoftFrame> frames,
                                 int video_length, const Propagator& prototype,
                                 int memory_period) {
  if (video_length < 1) throw std::invalid_argument("empty video");
  if (memory_period < 1) throw std::invalid_argument("memory_period must be >= 1");
  const SoftConsensusResult sc = SoftConsensus(frames);
  const SoftFrame& key = frames[sc.keyframe];
  OfflineSoftResult result;
  result.keyframe = key.frame_index;
  const int w = key.width;
  const int h = key.height;

  std::vector<uint8_t> hard(sc.consensus.size());
  for (size_t p = 0; p < hard.size(); ++p) hard[p] = sc.consensus[p] > 0.5f;
  const BinaryMask key_mask = BinaryMask::FromBitmap(w, h, hard);
  result.masks.assign(video_length, BinaryMask(w, h));
  if (key_mask.empty()) {
    result.warnings.push_back("offline consensus mask is empty");
    Log().warn("offline consensus mask is empty; output is empty everywhere");
    return result;
  }
  result.masks[key.frame_index] = key_mask;

  Segmentation seed = EmptySegmentation(key.frame_index, w, h);
  seed.segments.push_back(Segment{1, key_mask, std::nullopt, key.confidence});
  for (int direction : {+1, -1}) {
    auto prop = prototype.Fresh();
    prop->Update(seed);
    for (int t = key.frame_index + direction; t >= 0 && t < video_length;
         t += direction) {
      Segmentation out = prop->Propagate(t);
      const Segment* s = out.Find(1);
      if (s != nullptr) result.masks[t] = s->mask;
      if (std::abs(t - key.frame_index) % memory_period == 0) {
        prop->Update(out);
      }
    }
  }
  return result;
}

std::vector<Segmentation> RunOfflineSoftMulti(
    std::span<const std::vector<SoftFrame>> objects, int video_length,
    const Propagator& prototype) {
  if (objects.empty()) throw std::invalid_argument("no objects");
  std::vector<OfflineSoftResult> runs;
  std::vector<double> conf;
  for (const auto& frames : objects) {
    runs.push_back(RunOfflineSoft(frames, video_length, prototype));
    conf.push_back(frames[SoftConsensus(frames).keyframe].confidence);
  }
  const int w = objects.front().front().width;
  const int h = objects.front().front().height;
  std::vector<Segmentation> out;
  for (int t = 0; t < video_length; ++t) {
    std::vector<int> owner(static_cast<size_t>(w) * h, -1);
    for (size_t k = 0; k < runs.size(); ++k) {
      runs[k].masks[t].ForEachSpan([&](int64_t start, int64_t len) {
        for (int64_t p = start; p < start + len; ++p) {
          if (owner[p] < 0 || conf[k] > conf[owner[p]]) {
            owner[p] = static_cast<int>(k);
          }
        }
      });
    }
    Segmentation seg = EmptySegmentation(t, w, h);
    for (size_t k = 0; k < runs.size(); ++k) {
      std::vector<uint8_t> bm(owner.size(), 0);
      bool any = false;
      for (size_t p = 0; p < owner.size(); ++p) {
        if (owner[p] == static_cast<int>(k)) bm[p] = any = true;
      }
      if (!any) continue;
      seg.segments.push_back(Segment{static_cast<SegmentId>(k + 1),
                                     BinaryMask::FromBitmap(w, h, bm),
                                     std::nullopt, conf[k]});
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace devafuse
