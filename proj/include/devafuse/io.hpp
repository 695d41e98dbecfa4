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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "devafuse/association.hpp"
#include "devafuse/metrics.hpp"
#include "devafuse/motion.hpp"

namespace devafuse {

namespace fs = std::filesystem;

// Input/output failure. `exit_code` is what the CLI should return.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, int exit_code = 1)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

inline constexpr int kExitMissingFrame = 2;

// Largest id a 16-bit id map can carry.
inline constexpr SegmentId kMaxPngId = 65535;

// Frame file stem, e.g. 00042.
std::string FrameStem(int frame_index);

// 16-bit grayscale PNG; 0 is background, otherwise the pixel value is the
// segment id.
void WriteIdMapPng(const fs::path& path, const Segmentation& seg);
// Returns the per-pixel ids, row-major.
std::vector<uint16_t> ReadIdMapPng(const fs::path& path, int& width,
                                   int& height);

// Sidecar metadata: {"frame", "width", "height", "segments": {id: {"class",
// "confidence", "rle"?}}}. An "rle" entry, when present, must agree with the
// id map.
nlohmann::json SidecarJson(const Segmentation& seg);

// <dir>/NNNNN.png + <dir>/NNNNN.json.
void WriteFrame(const fs::path& dir, const Segmentation& seg);
Segmentation ReadFrame(const fs::path& dir, int frame_index);

struct VideoMeta {
  int num_frames = 0;
  int width = 0;
  int height = 0;
};

// A video directory holds meta.json plus one frame pair per frame.
void WriteVideo(const fs::path& dir, const TrackedVideo& video);
VideoMeta ReadVideoMeta(const fs::path& dir);
TrackedVideo ReadVideo(const fs::path& dir);
// Frame files named by meta.json that do not exist.
std::vector<fs::path> MissingFrameFiles(const fs::path& dir);

nlohmann::json ScriptsToJson(const SceneScripts& scripts);
SceneScripts ScriptsFromJson(const nlohmann::json& j);

nlohmann::json TracksToJson(const TrackTable& tracks);

// Parses a JSON file; syntax errors report path:line:column.
nlohmann::json ReadJsonFile(const fs::path& path);
// Pretty-printed with a trailing newline.
void WriteJsonFile(const fs::path& path, const nlohmann::json& j);
void WriteTextFile(const fs::path& path, const std::string& text);

}  // namespace devafuse
