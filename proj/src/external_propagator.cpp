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

#include "devafuse/external_propagator.hpp"

#include <csignal>
#include <set>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace devafuse {

using nlohmann::json;

json SegmentToWire(const Segment& s) {
  return json{{"id", s.id},
              {"rle", s.mask.runs()},
              {"w", s.mask.width()},
              {"h", s.mask.height()}};
}

Segment SegmentFromWire(const json& j) {
  Segment s;
  s.id = j.at("id").get<SegmentId>();
  s.mask = BinaryMask::FromRuns(j.at("w").get<int>(), j.at("h").get<int>(),
                                j.at("rle").get<std::vector<uint32_t>>());
  return s;
}

json MakeRequest(const std::string& cmd, int frame,
                 const std::vector<Segment>& segments) {
  json segs = json::array();
  for (const auto& s : segments) segs.push_back(SegmentToWire(s));
  return json{{"cmd", cmd}, {"frame", frame}, {"segments", std::move(segs)}};
}

ExternalPropagator::ExternalPropagator(std::string command)
    : command_(std::move(command)) {
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0) {
    throw PropagationError("cannot create pipes for '" + command_ + "'");
  }
  pid_ = fork();
  if (pid_ < 0) throw PropagationError("fork failed for '" + command_ + "'");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = fdopen(in_pipe[1], "w");
  from_child_ = fdopen(out_pipe[0], "r");
  if (to_child_ == nullptr || from_child_ == nullptr) {
    throw PropagationError("cannot open pipes for '" + command_ + "'");
  }
}

ExternalPropagator::~ExternalPropagator() {
  if (to_child_ != nullptr) fclose(to_child_);
  if (from_child_ != nullptr) fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

void ExternalPropagator::MixState(const std::string& line) {
  for (unsigned char c : line) {
    state_hash_ ^= c;
    state_hash_ *= 0x100000001b3ull;
  }
}

json ExternalPropagator::RoundTrip(const json& request) {
  const std::string line = request.dump() + "\n";
  if (fputs(line.c_str(), to_child_) < 0 || fflush(to_child_) != 0) {
    throw PropagationError("external propagator '" + command_ +
                           "' closed its input");
  }
  std::string reply;
  char buf[4096];
  while (fgets(buf, sizeof(buf), from_child_) != nullptr) {
    reply += buf;
    if (!reply.empty() && reply.back() == '\n') break;
  }
  if (reply.empty()) {
    throw PropagationError("external propagator '" + command_ +
                           "' exited without replying to " +
                           request.at("cmd").get<std::string>());
  }
  try {
    return json::parse(reply);
  } catch (const json::parse_error& e) {
    throw PropagationError("external propagator '" + command_ +
                           "' sent malformed JSON: " + e.what());
  }
}

void ExternalPropagator::Update(const Segmentation& seg) {
  if (initialized_ && (seg.width != width_ || seg.height != height_)) {
    throw PropagationError("memory update with mismatched frame dimensions");
  }
  initialized_ = true;
  width_ = seg.width;
  height_ = seg.height;
  for (const auto& s : seg.segments) {
    if (s.mask.empty()) continue;
    Segment meta{s.id, BinaryMask(), s.class_label, s.confidence};
    labels_[s.id] = std::move(meta);
  }
  const json request = MakeRequest("update", seg.frame_index, seg.segments);
  MixState(request.dump());
  RoundTrip(request);
}

Segmentation ExternalPropagator::Propagate(int query_frame) {
  if (!initialized_) {
    throw PropagationError("propagate called before any memory update");
  }
  const json reply = RoundTrip(MakeRequest("query", query_frame, {}));
  std::vector<Segment> segs;
  std::set<SegmentId> seen;
  try {
    for (const auto& j : reply.at("segments")) {
      Segment s = SegmentFromWire(j);
      if (s.mask.width() != width_ || s.mask.height() != height_) {
        throw PropagationError("external propagator returned a " +
                               std::to_string(s.mask.width()) + "x" +
                               std::to_string(s.mask.height()) + " mask");
      }
      auto it = labels_.find(s.id);
      if (it == labels_.end()) continue;  // not an active id
      if (!seen.insert(s.id).second) continue;
      s.class_label = it->second.class_label;
      s.confidence = it->second.confidence;
      segs.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw PropagationError("external propagator '" + command_ +
                           "' sent an invalid reply: " + e.what());
  } catch (const MaskError& e) {
    throw PropagationError("external propagator '" + command_ +
                           "' sent an invalid mask: " + e.what());
  }
  Segmentation out = RenderNonOverlapping(query_frame, width_, height_, segs);
  for (const auto& [id, meta] : labels_) {
    if (out.Find(id) == nullptr) {
      out.segments.push_back(
          Segment{id, BinaryMask(width_, height_), meta.class_label,
                  meta.confidence});
    }
  }
  return out;
}

void ExternalPropagator::Remove(std::span<const SegmentId> ids) {
  if (ids.empty()) return;
  for (SegmentId id : ids) labels_.erase(id);
  json request = MakeRequest("remove", -1, {});
  request["ids"] = std::vector<SegmentId>(ids.begin(), ids.end());
  MixState(request.dump());
  RoundTrip(request);
}

void ExternalPropagator::Reset() {
  labels_.clear();
  initialized_ = false;
  const json request = MakeRequest("reset", -1, {});
  MixState(request.dump());
  RoundTrip(request);
}

std::unique_ptr<Propagator> ExternalPropagator::Fresh() const {
  return std::make_unique<ExternalPropagator>(command_);
}

}  // namespace devafuse
