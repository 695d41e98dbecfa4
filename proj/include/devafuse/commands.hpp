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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "devafuse/config.hpp"

namespace devafuse {

// Bundle layout written by CmdSynth:
//
//   bundle.json                  inventory + generating configuration
//   gt/<video>/meta.json         ground truth, one frame pair per frame
//   gt/<video>/NNNNN.{png,json}
//   proposals/<video>/...        corrupted image segmentations, same layout
//   scripts/<video>.json         motion scripts for the oracle propagator
void CmdSynth(const Config& config, const std::filesystem::path& out,
              int jobs = 1);

struct RunOptions {
  // A bundle, or a directory whose subdirectories are videos.
  std::filesystem::path input;
  // Motion scripts directory for inputs that are not bundles.
  std::optional<std::filesystem::path> scripts;
  Config config;
  std::string propagator = "oracle";
  std::filesystem::path out;
  int jobs = 1;
};

// Writes <out>/<mode>/<video>/{meta.json, NNNNN.png, NNNNN.json,
// tracks.json} and <out>/<mode>/run.json. Throws IoError; a missing frame
// file carries kExitMissingFrame.
void CmdRun(const RunOptions& options);

// Parses "1,2,4,6,8,10,inf"; "inf" is the whole video.
std::vector<int> ParseWindows(const std::string& text);

struct EvalOptions {
  // Ground-truth video directory set, or a bundle.
  std::filesystem::path gt;
  // Each entry is a directory of videos (one row named after it) or a run
  // output root holding one such directory per mode (one row each).
  std::vector<std::filesystem::path> preds;
  std::vector<int> windows = kDefaultWindows;
  int jobs = 1;
};

// Values are percentages; undefined metrics are null. Per-video values are
// averaged over the videos where they are defined.
nlohmann::json CmdEval(const EvalOptions& options);
std::string FormatReportTable(const nlohmann::json& report);

struct InspectOptions {
  std::filesystem::path clip;  // frame pairs; the lowest frame is the target
  Config config;
  std::string propagator = "identity";
  std::optional<std::filesystem::path> scripts;  // file, for the oracle
};

nlohmann::json CmdInspect(const InspectOptions& options);
std::string FormatInspect(const nlohmann::json& dump);

}  // namespace devafuse
