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

#include <functional>
#include <memory>
#include <string>

#include "devafuse/config.hpp"
#include "devafuse/metrics.hpp"
#include "devafuse/pipeline.hpp"
#include "devafuse/synth.hpp"

namespace devafuse {

struct BenchmarkVideo {
  std::string name;
  SyntheticVideo truth;
  TrackedVideo proposals;
};

// "v000", "v001", ...
std::string VideoName(int index);

// Video `index` of the benchmark described by `config`; scene and noise
// seeds derive from config.benchmark.seed.
BenchmarkVideo MakeBenchmarkVideo(const Config& config, int index);

// "identity", "oracle" or "external:<command>". The oracle needs scripts.
std::unique_ptr<Propagator> MakePropagator(
    const std::string& spec, std::shared_ptr<const SceneScripts> scripts);

// Dispatches on config.mode.
PipelineResult RunOnVideo(const TrackedVideo& proposals,
                          const PipelineConfig& config, Propagator& propagator);

// Tracks that are visible in exactly one frame.
int CountSingleFrameTracks(const TrackedVideo& video);

// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown
// after all workers finish.
void ParallelFor(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace devafuse
