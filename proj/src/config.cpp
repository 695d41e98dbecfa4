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

#include "devafuse/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "devafuse/io.hpp"

namespace devafuse {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& origin, const YAML::Mark& mark,
                       const std::string& message) {
  std::string where = origin;
  if (!mark.is_null()) {
    where += ":" + std::to_string(mark.line + 1) + ":" +
             std::to_string(mark.column + 1);
  }
  throw IoError(where + ": " + message);
}

template <typename T>
T As(const YAML::Node& node, const std::string& key,
     const std::string& origin) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    Fail(origin, node.Mark(), "invalid value for '" + key + "'");
  }
}

using Setter = std::function<void(const YAML::Node&, const std::string&)>;

void ApplySection(const YAML::Node& section, const std::string& name,
                  const std::map<std::string, Setter>& setters,
                  const std::string& origin) {
  if (!section) return;
  if (!section.IsMap()) Fail(origin, section.Mark(), "'" + name + "' must be a mapping");
  for (const auto& kv : section) {
    const std::string key = kv.first.as<std::string>();
    auto it = setters.find(key);
    if (it == setters.end()) {
      Fail(origin, kv.first.Mark(), "unknown key '" + name + "." + key + "'");
    }
    it->second(kv.second, name + "." + key);
  }
}

template <typename T>
Setter Set(T& field, const std::string& origin) {
  return [&field, origin](const YAML::Node& n, const std::string& key) {
    field = As<T>(n, key, origin);
  };
}

}  // namespace

Config ParseConfig(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    Fail(origin, e.mark, e.msg);
  }
  Config cfg;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) Fail(origin, root.Mark(), "top level must be a mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (key != "pipeline" && key != "scene" && key != "noise" &&
        key != "benchmark") {
      Fail(origin, kv.first.Mark(), "unknown section '" + key + "'");
    }
  }

  const YAML::Node pipeline = root["pipeline"];
  if (pipeline && pipeline.IsMap() && pipeline["mode"]) {
    const YAML::Node m = pipeline["mode"];
    try {
      cfg.pipeline =
          PipelineConfig::ForMode(ParseMode(As<std::string>(m, "pipeline.mode", origin)));
    } catch (const std::invalid_argument& e) {
      Fail(origin, m.Mark(), e.what());
    }
  }
  PipelineConfig& p = cfg.pipeline;
  ApplySection(pipeline, "pipeline",
               {{"mode", [](const YAML::Node&, const std::string&) {}},
                {"clip_size", Set(p.clip_size, origin)},
                {"merge_period", Set(p.merge_period, origin)},
                {"alpha", Set(p.alpha, origin)},
                {"iou_threshold", Set(p.iou_threshold, origin)},
                {"deletion_limit", Set(p.deletion_limit, origin)},
                {"spatial_alignment", Set(p.spatial_alignment, origin)},
                {"exact_cap", Set(p.exact_cap, origin)}},
               origin);

  SceneConfig& s = cfg.scene;
  ApplySection(root["scene"], "scene",
               {{"width", Set(s.width, origin)},
                {"height", Set(s.height, origin)},
                {"num_frames", Set(s.num_frames, origin)},
                {"num_objects", Set(s.num_objects, origin)},
                {"num_classes", Set(s.num_classes, origin)},
                {"shapes",
                 [&s, origin](const YAML::Node& n, const std::string& key) {
                   try {
                     s.shapes = ParseShapeFamily(As<std::string>(n, key, origin));
                   } catch (const SynthError& e) {
                     Fail(origin, n.Mark(), e.what());
                   }
                 }},
                {"min_size", Set(s.min_size, origin)},
                {"max_size", Set(s.max_size, origin)},
                {"min_speed", Set(s.min_speed, origin)},
                {"max_speed", Set(s.max_speed, origin)},
                {"late_entry_prob", Set(s.late_entry_prob, origin)},
                {"early_exit_prob", Set(s.early_exit_prob, origin)}},
               origin);

  NoiseConfig& z = cfg.noise;
  ApplySection(root["noise"], "noise",
               {{"dropout", Set(z.dropout, origin)},
                {"spurious_rate", Set(z.spurious_rate, origin)},
                {"jitter", Set(z.jitter, origin)},
                {"split", Set(z.split, origin)},
                {"class_flip", Set(z.class_flip, origin)},
                {"spurious_min_size", Set(z.spurious_min_size, origin)},
                {"spurious_max_size", Set(z.spurious_max_size, origin)}},
               origin);

  BenchmarkConfig& b = cfg.benchmark;
  ApplySection(root["benchmark"], "benchmark",
               {{"videos", Set(b.videos, origin)}, {"seed", Set(b.seed, origin)}},
               origin);

  try {
    cfg.pipeline.Validate();
    cfg.scene.Validate();
    cfg.noise.Validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(origin + ": " + e.what());
  }
  if (b.videos < 1) throw IoError(origin + ": benchmark.videos must be >= 1");
  return cfg;
}

Config LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path.string());
}

std::string ConfigToYaml(const Config& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "pipeline" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(ModeName(c.pipeline.mode));
  out << YAML::Key << "clip_size" << YAML::Value << c.pipeline.clip_size;
  out << YAML::Key << "merge_period" << YAML::Value << c.pipeline.merge_period;
  out << YAML::Key << "alpha" << YAML::Value << c.pipeline.alpha;
  out << YAML::Key << "iou_threshold" << YAML::Value << c.pipeline.iou_threshold;
  out << YAML::Key << "deletion_limit" << YAML::Value << c.pipeline.deletion_limit;
  out << YAML::Key << "spatial_alignment" << YAML::Value << c.pipeline.spatial_alignment;
  out << YAML::Key << "exact_cap" << YAML::Value << c.pipeline.exact_cap;
  out << YAML::EndMap;
  out << YAML::Key << "scene" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "width" << YAML::Value << c.scene.width;
  out << YAML::Key << "height" << YAML::Value << c.scene.height;
  out << YAML::Key << "num_frames" << YAML::Value << c.scene.num_frames;
  out << YAML::Key << "num_objects" << YAML::Value << c.scene.num_objects;
  out << YAML::Key << "num_classes" << YAML::Value << c.scene.num_classes;
  out << YAML::Key << "shapes" << YAML::Value << std::string(ShapeFamilyName(c.scene.shapes));
  out << YAML::Key << "min_size" << YAML::Value << c.scene.min_size;
  out << YAML::Key << "max_size" << YAML::Value << c.scene.max_size;
  out << YAML::Key << "min_speed" << YAML::Value << c.scene.min_speed;
  out << YAML::Key << "max_speed" << YAML::Value << c.scene.max_speed;
  out << YAML::Key << "late_entry_prob" << YAML::Value << c.scene.late_entry_prob;
  out << YAML::Key << "early_exit_prob" << YAML::Value << c.scene.early_exit_prob;
  out << YAML::EndMap;
  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dropout" << YAML::Value << c.noise.dropout;
  out << YAML::Key << "spurious_rate" << YAML::Value << c.noise.spurious_rate;
  out << YAML::Key << "jitter" << YAML::Value << c.noise.jitter;
  out << YAML::Key << "split" << YAML::Value << c.noise.split;
  out << YAML::Key << "class_flip" << YAML::Value << c.noise.class_flip;
  out << YAML::Key << "spurious_min_size" << YAML::Value << c.noise.spurious_min_size;
  out << YAML::Key << "spurious_max_size" << YAML::Value << c.noise.spurious_max_size;
  out << YAML::EndMap;
  out << YAML::Key << "benchmark" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "videos" << YAML::Value << c.benchmark.videos;
  out << YAML::Key << "seed" << YAML::Value << c.benchmark.seed;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

json SceneToJson(const SceneConfig& s) {
  return json{{"width", s.width},
              {"height", s.height},
              {"num_frames", s.num_frames},
              {"num_objects", s.num_objects},
              {"num_classes", s.num_classes},
              {"shapes", std::string(ShapeFamilyName(s.shapes))},
              {"min_size", s.min_size},
              {"max_size", s.max_size},
              {"min_speed", s.min_speed},
              {"max_speed", s.max_speed},
              {"late_entry_prob", s.late_entry_prob},
              {"early_exit_prob", s.early_exit_prob},
              {"seed", s.seed}};
}

json NoiseToJson(const NoiseConfig& n) {
  return json{{"dropout", n.dropout},
              {"spurious_rate", n.spurious_rate},
              {"jitter", n.jitter},
              {"split", n.split},
              {"class_flip", n.class_flip},
              {"spurious_min_size", n.spurious_min_size},
              {"spurious_max_size", n.spurious_max_size}};
}

json PipelineToJson(const PipelineConfig& p) {
  return json{{"mode", std::string(ModeName(p.mode))},
              {"clip_size", p.clip_size},
              {"merge_period", p.merge_period},
              {"alpha", p.alpha},
              {"iou_threshold", p.iou_threshold},
              {"deletion_limit", p.deletion_limit},
              {"spatial_alignment", p.spatial_alignment},
              {"exact_cap", p.exact_cap}};
}

}  // namespace devafuse
