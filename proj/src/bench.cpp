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

#include "devafuse/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "devafuse/external_propagator.hpp"

namespace devafuse {

std::string VideoName(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%03d", index);
  return buf;
}

BenchmarkVideo MakeBenchmarkVideo(const Config& config, int index) {
  const uint64_t stream = static_cast<uint64_t>(index) + 1;
  SceneConfig scene = config.scene;
  scene.seed = StreamSeed(config.benchmark.seed, stream, 0);
  const uint64_t noise_seed = StreamSeed(config.benchmark.seed, stream, 1);

  BenchmarkVideo v;
  v.name = VideoName(index);
  v.truth = GenerateScene(scene);
  v.proposals.reserve(v.truth.gt.size());
  for (const auto& frame : v.truth.gt) {
    v.proposals.push_back(Corrupt(frame, config.noise, noise_seed,
                                  frame.frame_index, scene.num_classes));
  }
  return v;
}

std::unique_ptr<Propagator> MakePropagator(
    const std::string& spec, std::shared_ptr<const SceneScripts> scripts) {
  if (spec == "identity") return std::make_unique<IdentityPropagator>();
  if (spec == "oracle") {
    if (!scripts) {
      throw std::invalid_argument("the oracle propagator needs motion scripts");
    }
    return std::make_unique<MotionOraclePropagator>(std::move(scripts));
  }
  const std::string prefix = "external:";
  if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size()) {
    return std::make_unique<ExternalPropagator>(spec.substr(prefix.size()));
  }
  throw std::invalid_argument("unknown propagator '" + spec +
                              "' (expected identity, oracle or external:<cmd>)");
}

PipelineResult RunOnVideo(const TrackedVideo& proposals,
                          const PipelineConfig& config,
                          Propagator& propagator) {
  VectorSource source(proposals);
  if (config.mode == PipelineMode::kMaskIouBaseline) {
    return RunMaskIouBaseline(source, config.iou_threshold);
  }
  return RunPipeline(source, propagator, config);
}

int CountSingleFrameTracks(const TrackedVideo& video) {
  std::map<SegmentId, int> frames;
  for (const auto& seg : video) {
    for (const auto& s : seg.segments) {
      if (!s.mask.empty()) ++frames[s.id];
    }
  }
  return static_cast<int>(
      std::count_if(frames.begin(), frames.end(),
                    [](const auto& kv) { return kv.second == 1; }));
}

void ParallelFor(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  jobs = std::clamp(jobs, 1, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace devafuse
