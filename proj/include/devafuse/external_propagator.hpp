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

#include <cstdio>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "devafuse/propagation.hpp"

namespace devafuse {

// Wire helpers for the newline-delimited JSON protocol. Segments travel as
// {"id", "rle", "w", "h"} with row-major runs.
nlohmann::json SegmentToWire(const Segment& s);
Segment SegmentFromWire(const nlohmann::json& j);
nlohmann::json MakeRequest(const std::string& cmd, int frame,
                           const std::vector<Segment>& segments);

// Child-process propagator speaking one JSON object per line over the
// child's stdin/stdout. Every request gets exactly one reply line, in
// request order:
//
//   {"cmd":"update","frame":t,"segments":[...]}  -> any JSON object
//   {"cmd":"query","frame":t,"segments":[]}      -> {"frame":t,"segments":[...]}
//   {"cmd":"remove","frame":-1,"segments":[],"ids":[...]} -> any JSON object
//   {"cmd":"reset","frame":-1,"segments":[]}     -> any JSON object
//
// Class labels and confidences never cross the wire; they are kept here and
// reattached by id.
class ExternalPropagator final : public Propagator {
 public:
  explicit ExternalPropagator(std::string command);
  ~ExternalPropagator() override;
  ExternalPropagator(const ExternalPropagator&) = delete;
  ExternalPropagator& operator=(const ExternalPropagator&) = delete;

  void Update(const Segmentation& seg) override;
  Segmentation Propagate(int query_frame) override;
  void Remove(std::span<const SegmentId> ids) override;
  void Reset() override;
  bool HasMemory() const override { return initialized_; }
  std::unique_ptr<Propagator> Fresh() const override;
  uint64_t StateHash() const override { return state_hash_; }
  std::string Name() const override { return "external:" + command_; }

 private:
  nlohmann::json RoundTrip(const nlohmann::json& request);
  void MixState(const std::string& line);

  std::string command_;
  int pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;

  bool initialized_ = false;
  int width_ = 0;
  int height_ = 0;
  std::map<SegmentId, Segment> labels_;  // masks unused; metadata only
  uint64_t state_hash_ = 0xcbf29ce484222325ull;
};

}  // namespace devafuse
