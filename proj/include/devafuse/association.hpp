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
#include <utility>
#include <vector>

#include "devafuse/segmentation.hpp"

namespace devafuse {

struct Track {
  SegmentId track_id = 0;
  int cnt = 0;  // consecutive merges without a match
  std::vector<ClassId> class_votes;
  int birth_frame = 0;
  std::optional<ClassId> label;  // current majority label
  std::optional<double> confidence;
};

// Index pairs into R (propagated) and C (consensus).
struct Association {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> unmatched_r;
  std::vector<int> unmatched_c;
};

// Tracks keyed by id plus the id allocator. Ids are never reused.
class TrackTable {
 public:
  SegmentId MintId() { return next_id_++; }
  Track& Create(int birth_frame, std::optional<ClassId> label,
                std::optional<double> confidence);
  // Gives an existing track a fresh id; returns the new id.
  SegmentId Rekey(SegmentId old_id);
  void Erase(SegmentId id) { tracks_.erase(id); }

  Track* Find(SegmentId id);
  const Track* Find(SegmentId id) const;
  const std::map<SegmentId, Track>& tracks() const { return tracks_; }
  std::map<SegmentId, Track>& tracks() { return tracks_; }
  size_t size() const { return tracks_.size(); }
  SegmentId next_id() const { return next_id_; }

 private:
  SegmentId next_id_ = 1;
  std::map<SegmentId, Track> tracks_;
};

// Pairs every (i, j) with IoU(r_i, c_j) > threshold. On disjoint
// segmentations with threshold >= 0.5 each segment has at most one such
// counterpart, so this is also the maximum-IoU matching. For lower
// thresholds conflicts are resolved greedily by descending IoU.
Association MatchSegments(const Segmentation& r, const Segmentation& c,
                          double threshold = 0.5);

// Majority label with ties going to the most recently appended tied label.
std::optional<ClassId> VoteClass(const std::vector<ClassId>& votes);

struct MergeOptions {
  // Drop propagated segments without a consensus partner.
  bool drop_unmatched_propagated = false;
};

struct MergeResult {
  Segmentation merged;
  std::vector<SegmentId> new_tracks;
  // Tracks whose majority label flipped and were re-keyed.
  std::vector<std::pair<SegmentId, SegmentId>> rekeyed;
};

// Fuses matched pairs as r ∪ c under r's track id, passes unmatched r
// through, and spawns a track per unmatched c. Matched tracks receive c's
// label as a class vote; a change of majority label re-keys the track.
MergeResult Merge(const Segmentation& r, const Segmentation& c,
                  const Association& assoc, TrackTable& tracks,
                  const MergeOptions& options = {});

struct LifecycleResult {
  std::vector<SegmentId> deleted;
};

// Resets the counter of every track matched in `matched_ids` and increments
// the rest; tracks reaching `deletion_limit` are erased.
LifecycleResult UpdateLifecycle(TrackTable& tracks,
                                const std::vector<SegmentId>& matched_ids,
                                int deletion_limit);

}  // namespace devafuse
