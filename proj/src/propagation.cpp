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

#include "devafuse/propagation.hpp"

#include <unordered_map>

namespace devafuse {
namespace {

class Fnv1a {
 public:
  void Mix(uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffu;
      state_ *= 0x100000001b3ull;
    }
  }
  uint64_t value() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace

void PropagatorMemory::Update(const Segmentation& seg) {
  if (initialized_ && (seg.width != width_ || seg.height != height_)) {
    throw PropagationError("memory update with mismatched frame dimensions");
  }
  initialized_ = true;
  width_ = seg.width;
  height_ = seg.height;
  for (const auto& s : seg.segments) {
    if (s.mask.empty()) {
      // Keep the last evidence for ids that vanished; they stay active.
      entries_.try_emplace(s.id, Entry{seg.frame_index, s});
      continue;
    }
    entries_[s.id] = Entry{seg.frame_index, s};
  }
}

void PropagatorMemory::Remove(std::span<const SegmentId> ids) {
  for (SegmentId id : ids) entries_.erase(id);
}

void PropagatorMemory::Clear() {
  initialized_ = false;
  width_ = height_ = 0;
  entries_.clear();
}

std::vector<SegmentId> PropagatorMemory::ActiveIds() const {
  std::vector<SegmentId> ids;
  ids.reserve(entries_.size());
  for (const auto& [id, _] : entries_) ids.push_back(id);
  return ids;
}

uint64_t PropagatorMemory::Hash() const {
  Fnv1a h;
  h.Mix(initialized_);
  h.Mix(static_cast<uint64_t>(width_));
  h.Mix(static_cast<uint64_t>(height_));
  for (const auto& [id, e] : entries_) {
    h.Mix(static_cast<uint64_t>(id));
    h.Mix(static_cast<uint64_t>(e.frame_index));
    for (uint32_t r : e.segment.mask.runs()) h.Mix(r);
  }
  return h.value();
}

Segmentation MemoryPropagator::Propagate(int query_frame) {
  if (!memory_.initialized()) {
    throw PropagationError("propagate called before any memory update");
  }
  const int w = memory_.width();
  const int h = memory_.height();
  std::vector<Segment> moved;
  moved.reserve(memory_.entries().size());
  for (const auto& [id, entry] : memory_.entries()) {
    Segment s = entry.segment;
    s.mask = entry.segment.mask.empty() ? BinaryMask(w, h)
                                        : Transport(entry, query_frame);
    moved.push_back(std::move(s));
  }
  // Masks memorized at different frames may collide after transport.
  Segmentation out = RenderNonOverlapping(query_frame, w, h, moved);
  for (auto& s : moved) {
    if (out.Find(s.id) == nullptr) {
      s.mask = BinaryMask(w, h);
      out.segments.push_back(std::move(s));
    }
  }
  return out;
}

std::unique_ptr<Propagator> IdentityPropagator::Fresh() const {
  return std::make_unique<IdentityPropagator>();
}

BinaryMask IdentityPropagator::Transport(const PropagatorMemory::Entry& entry,
                                         int /*query_frame*/) const {
  return entry.segment.mask;
}

Segmentation AlignOne(const Segmentation& source, int target_frame,
                      const Propagator& prototype) {
  if (source.frame_index == target_frame) return source;
  auto temp = prototype.Fresh();
  temp->Update(source);
  Segmentation moved = temp->Propagate(target_frame);

  std::unordered_map<SegmentId, const Segment*> by_id;
  for (const auto& s : moved.segments) by_id[s.id] = &s;
  Segmentation out =
      EmptySegmentation(target_frame, source.width, source.height);
  for (const auto& src : source.segments) {
    Segment s = src;
    auto it = by_id.find(src.id);
    s.mask = it == by_id.end() ? BinaryMask(source.width, source.height)
                               : it->second->mask;
    out.segments.push_back(std::move(s));
  }
  return out;
}

}  // namespace devafuse
