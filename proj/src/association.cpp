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

#include "devafuse/association.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace devafuse {

Track& TrackTable::Create(int birth_frame, std::optional<ClassId> label,
                          std::optional<double> confidence) {
  const SegmentId id = MintId();
  Track t;
  t.track_id = id;
  t.birth_frame = birth_frame;
  if (label) t.class_votes.push_back(*label);
  t.label = label;
  t.confidence = confidence;
  return tracks_.emplace(id, std::move(t)).first->second;
}

SegmentId TrackTable::Rekey(SegmentId old_id) {
  auto node = tracks_.extract(old_id);
  if (node.empty()) {
    throw std::out_of_range("no track " + std::to_string(old_id));
  }
  const SegmentId id = MintId();
  node.key() = id;
  node.mapped().track_id = id;
  tracks_.insert(std::move(node));
  return id;
}

Track* TrackTable::Find(SegmentId id) {
  auto it = tracks_.find(id);
  return it == tracks_.end() ? nullptr : &it->second;
}

const Track* TrackTable::Find(SegmentId id) const {
  auto it = tracks_.find(id);
  return it == tracks_.end() ? nullptr : &it->second;
}

Association MatchSegments(const Segmentation& r, const Segmentation& c,
                          double threshold) {
  std::vector<std::tuple<double, int, int>> candidates;
  for (size_t i = 0; i < r.segments.size(); ++i) {
    if (r.segments[i].mask.empty()) continue;
    for (size_t j = 0; j < c.segments.size(); ++j) {
      const double iou = Iou(r.segments[i].mask, c.segments[j].mask);
      if (iou > threshold) {
        candidates.emplace_back(iou, static_cast<int>(i),
                                static_cast<int>(j));
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) {
                     return std::get<0>(a) > std::get<0>(b);
                   });
  Association assoc;
  std::vector<bool> used_r(r.segments.size(), false);
  std::vector<bool> used_c(c.segments.size(), false);
  for (const auto& [iou, i, j] : candidates) {
    if (used_r[i] || used_c[j]) continue;
    used_r[i] = used_c[j] = true;
    assoc.pairs.emplace_back(i, j);
  }
  std::sort(assoc.pairs.begin(), assoc.pairs.end());
  for (size_t i = 0; i < used_r.size(); ++i) {
    if (!used_r[i]) assoc.unmatched_r.push_back(static_cast<int>(i));
  }
  for (size_t j = 0; j < used_c.size(); ++j) {
    if (!used_c[j]) assoc.unmatched_c.push_back(static_cast<int>(j));
  }
  return assoc;
}

std::optional<ClassId> VoteClass(const std::vector<ClassId>& votes) {
  if (votes.empty()) return std::nullopt;
  std::unordered_map<ClassId, int> counts;
  std::unordered_map<ClassId, size_t> last_seen;
  for (size_t k = 0; k < votes.size(); ++k) {
    ++counts[votes[k]];
    last_seen[votes[k]] = k;
  }
  ClassId best = votes.back();
  for (const auto& [label, count] : counts) {
    const int best_count = counts[best];
    if (count > best_count ||
        (count == best_count && last_seen[label] > last_seen[best])) {
      best = label;
    }
  }
  return best;
}

MergeResult Merge(const Segmentation& r, const Segmentation& c,
                  const Association& assoc, TrackTable& tracks,
                  const MergeOptions& options) {
  if (r.width != c.width || r.height != c.height) {
    throw MaskError("propagated and consensus frames differ in size");
  }
  const int frame = c.frame_index;
  std::vector<int> partner(r.segments.size(), -1);
  for (const auto& [i, j] : assoc.pairs) partner[i] = j;

  MergeResult result;
  std::vector<Segment> out;
  for (size_t i = 0; i < r.segments.size(); ++i) {
    const Segment& ri = r.segments[i];
    Track* track = tracks.Find(ri.id);
    if (partner[i] < 0) {
      if (options.drop_unmatched_propagated) continue;
      Segment s = ri;
      if (track != nullptr) {
        s.class_label = track->label;
        s.confidence = track->confidence;
      }
      out.push_back(std::move(s));
      continue;
    }
    const Segment& cj = c.segments[partner[i]];
    if (track == nullptr) {
      // Propagated id without a table entry; adopt it.
      Track adopted;
      adopted.track_id = ri.id;
      adopted.birth_frame = frame;
      adopted.label = ri.class_label;
      if (ri.class_label) adopted.class_votes.push_back(*ri.class_label);
      track = &tracks.tracks().emplace(ri.id, std::move(adopted)).first->second;
    }
    if (cj.class_label) track->class_votes.push_back(*cj.class_label);
    const auto majority = VoteClass(track->class_votes);
    SegmentId id = track->track_id;
    if (track->label && majority && *majority != *track->label) {
      const SegmentId old_id = id;
      id = tracks.Rekey(old_id);
      track = tracks.Find(id);
      result.rekeyed.emplace_back(old_id, id);
    }
    track->label = majority;
    if (cj.confidence) track->confidence = cj.confidence;
    out.push_back(Segment{id, Union(ri.mask, cj.mask), track->label,
                          track->confidence});
  }
  for (int j : assoc.unmatched_c) {
    const Segment& cj = c.segments[j];
    Track& t = tracks.Create(frame, cj.class_label, cj.confidence);
    result.new_tracks.push_back(t.track_id);
    out.push_back(Segment{t.track_id, cj.mask, cj.class_label, cj.confidence});
  }
  result.merged = RenderNonOverlapping(frame, c.width, c.height, std::move(out));
  return result;
}

LifecycleResult UpdateLifecycle(TrackTable& tracks,
                                const std::vector<SegmentId>& matched_ids,
                                int deletion_limit) {
  if (deletion_limit < 1) {
    throw std::invalid_argument("deletion limit must be at least 1");
  }
  const std::set<SegmentId> matched(matched_ids.begin(), matched_ids.end());
  LifecycleResult result;
  for (auto& [id, track] : tracks.tracks()) {
    if (matched.count(id) != 0) {
      track.cnt = 0;
    } else if (++track.cnt >= deletion_limit) {
      result.deleted.push_back(id);
    }
  }
  for (SegmentId id : result.deleted) tracks.Erase(id);
  return result;
}

}  // namespace devafuse
