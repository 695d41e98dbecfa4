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
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "devafuse/segmentation.hpp"

namespace devafuse {

class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Temporal propagation: given a memory of segmented frames, segment a query
// frame with the ids held in memory.
//
// Implementations are single-owner and stateful. Propagate() returns exactly
// one segment per active id; ids whose object is not visible at the query
// frame come back with an empty mask.
class Propagator {
 public:
  virtual ~Propagator() = default;

  virtual void Update(const Segmentation& seg) = 0;
  // Throws PropagationError if called before any Update().
  virtual Segmentation Propagate(int query_frame) = 0;
  // Purges ids from memory; unknown ids are ignored.
  virtual void Remove(std::span<const SegmentId> ids) = 0;
  virtual void Reset() = 0;
  virtual bool HasMemory() const = 0;

  // A new instance of the same kind with empty memory.
  virtual std::unique_ptr<Propagator> Fresh() const = 0;
  virtual uint64_t StateHash() const = 0;
  virtual std::string Name() const = 0;
};

// Keeps the most recent non-empty segment per id.
class PropagatorMemory {
 public:
  struct Entry {
    int frame_index = 0;
    Segment segment;
  };

  void Update(const Segmentation& seg);
  void Remove(std::span<const SegmentId> ids);
  void Clear();

  bool initialized() const { return initialized_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const std::map<SegmentId, Entry>& entries() const { return entries_; }
  std::vector<SegmentId> ActiveIds() const;
  uint64_t Hash() const;

 private:
  bool initialized_ = false;
  int width_ = 0;
  int height_ = 0;
  std::map<SegmentId, Entry> entries_;
};

// Base for propagators whose state is a PropagatorMemory; subclasses only
// decide how one memorized segment moves to the query frame.
class MemoryPropagator : public Propagator {
 public:
  void Update(const Segmentation& seg) override { memory_.Update(seg); }
  Segmentation Propagate(int query_frame) override;
  void Remove(std::span<const SegmentId> ids) override { memory_.Remove(ids); }
  void Reset() override { memory_.Clear(); }
  bool HasMemory() const override { return memory_.initialized(); }
  uint64_t StateHash() const override { return memory_.Hash(); }

  const PropagatorMemory& memory() const { return memory_; }

 protected:
  virtual BinaryMask Transport(const PropagatorMemory::Entry& entry,
                               int query_frame) const = 0;

 private:
  PropagatorMemory memory_;
};

// Returns memorized masks unchanged.
class IdentityPropagator final : public MemoryPropagator {
 public:
  std::unique_ptr<Propagator> Fresh() const override;
  std::string Name() const override { return "identity"; }

 protected:
  BinaryMask Transport(const PropagatorMemory::Entry& entry,
                       int query_frame) const override;
};

// Aligns `source` to `target_frame` with a private, fresh propagator built
// from `prototype`; the prototype's own memory is never touched. Output
// segments follow the source order and keep their labels.
Segmentation AlignOne(const Segmentation& source, int target_frame,
                      const Propagator& prototype);

}  // namespace devafuse
