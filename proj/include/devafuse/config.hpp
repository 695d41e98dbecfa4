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
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "devafuse/pipeline.hpp"
#include "devafuse/synth.hpp"

namespace devafuse {

struct BenchmarkConfig {
  int videos = 4;
  uint64_t seed = 1;
};

// One YAML document with sections `pipeline`, `scene`, `noise` and
// `benchmark`. Every key is optional; unknown keys are errors.
struct Config {
  PipelineConfig pipeline;
  SceneConfig scene;
  NoiseConfig noise;
  BenchmarkConfig benchmark;
};

// Throws IoError with "path:line:column: message" diagnostics.
Config LoadConfig(const std::filesystem::path& path);
Config ParseConfig(const std::string& text, const std::string& origin);
std::string ConfigToYaml(const Config& config);

nlohmann::json SceneToJson(const SceneConfig& scene);
nlohmann::json NoiseToJson(const NoiseConfig& noise);
nlohmann::json PipelineToJson(const PipelineConfig& pipeline);

}  // namespace devafuse
