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

#include "devafuse/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "devafuse/bench.hpp"
#include "devafuse/consensus.hpp"
#include "devafuse/io.hpp"
#include "devafuse/log.hpp"

namespace devafuse {
namespace {

using nlohmann::json;

constexpr const char* kBundleFormat = "devafuse-bundle";

bool IsVideoDir(const fs::path& p) {
  return fs::is_directory(p) && fs::exists(p / "meta.json");
}

bool IsBundle(const fs::path& p) { return fs::exists(p / "bundle.json"); }

std::vector<std::string> BundleVideos(const fs::path& bundle) {
  const fs::path path = bundle / "bundle.json";
  const json j = ReadJsonFile(path);
  if (j.value("format", "") != kBundleFormat) {
    throw IoError(path.string() + ": not a " + kBundleFormat + " manifest");
  }
  try {
    return j.at("videos").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// Sorted names of the video subdirectories of `dir`.
std::vector<std::string> ListVideos(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (IsVideoDir(e.path())) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string WindowKey(int w) {
  return w == kWholeVideo ? "inf" : std::to_string(w);
}

json Percent(const std::optional<double>& v) {
  return v ? json(100.0 * *v) : json(nullptr);
}

json VideoMetrics(const MetricReport& r, const std::vector<int>& windows) {
  json m;
  m["pq"] = Percent(r.pq);
  for (int w : windows) m["vpq_" + WindowKey(w)] = Percent(r.vpq.at(w));
  m["vpq_bar"] = Percent(r.vpq_bar);
  m["stq"] = 100.0 * r.stq.stq;
  m["aq"] = 100.0 * r.stq.aq;
  m["sq"] = 100.0 * r.stq.sq;
  m["owta"] = 100.0 * r.owta.owta;
  m["det_re"] = 100.0 * r.owta.det_re;
  m["ass_a"] = 100.0 * r.owta.ass_a;
  return m;
}

std::string Join(const std::vector<std::string>& items) {
  std::string s;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) s += ", ";
    s += items[i];
  }
  return s;
}

}  // namespace

void CmdSynth(const Config& config, const fs::path& out, int jobs) {
  config.scene.Validate();
  config.noise.Validate();
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw IoError(out.string() + " is not a directory");
    if (IsBundle(out)) {
      for (const char* sub : {"gt", "proposals", "scripts"}) fs::remove_all(out / sub);
      fs::remove(out / "bundle.json");
    } else if (!fs::is_empty(out)) {
      throw IoError(out.string() + " exists, is not empty and is not a bundle");
    }
  }
  fs::create_directories(out / "scripts");

  const int n = config.benchmark.videos;
  std::vector<std::string> names(n);
  ParallelFor(n, jobs, [&](int v) {
    const BenchmarkVideo bv = MakeBenchmarkVideo(config, v);
    WriteVideo(out / "gt" / bv.name, bv.truth.gt);
    WriteVideo(out / "proposals" / bv.name, bv.proposals);
    WriteJsonFile(out / "scripts" / (bv.name + ".json"),
                  ScriptsToJson(bv.truth.scripts));
    names[v] = bv.name;
  });

  json scene = SceneToJson(config.scene);
  scene.erase("seed");
  WriteJsonFile(out / "bundle.json",
                json{{"format", kBundleFormat},
                     {"version", 1},
                     {"videos", names},
                     {"benchmark",
                      {{"videos", config.benchmark.videos},
                       {"seed", config.benchmark.seed}}},
                     {"scene", std::move(scene)},
                     {"noise", NoiseToJson(config.noise)}});
}

void CmdRun(const RunOptions& o) {
  o.config.pipeline.Validate();
  if (o.config.pipeline.mode == PipelineMode::kOfflineSoft) {
    throw IoError(
        "offline_soft needs per-object probability maps, which id-map "
        "inputs do not carry");
  }
  const bool bundle = IsBundle(o.input);
  const fs::path videos_root = bundle ? o.input / "proposals" : o.input;
  const std::vector<std::string> videos =
      bundle ? BundleVideos(o.input) : ListVideos(o.input);
  if (videos.empty()) throw IoError("no videos under " + videos_root.string());

  for (const auto& v : videos) {
    const fs::path dir = videos_root / v;
    if (!IsVideoDir(dir)) {
      throw IoError("video " + v + ": missing " + (dir / "meta.json").string());
    }
    const auto missing = MissingFrameFiles(dir);
    if (!missing.empty()) {
      const std::string stem = missing.front().stem().string();
      throw IoError("video " + v + ": missing frame " +
                        std::to_string(std::stoi(stem)) + " (" +
                        missing.front().string() + ")",
                    kExitMissingFrame);
    }
  }
  const bool needs_scripts = o.propagator == "oracle";
  std::optional<fs::path> scripts_dir = o.scripts;
  if (!scripts_dir && bundle) scripts_dir = o.input / "scripts";

  const std::string mode(ModeName(o.config.pipeline.mode));
  const fs::path out_root = o.out / mode;
  fs::create_directories(out_root);

  std::vector<std::vector<std::string>> warnings(videos.size());
  ParallelFor(static_cast<int>(videos.size()), o.jobs, [&](int i) {
    const std::string& v = videos[i];
    const TrackedVideo proposals = ReadVideo(videos_root / v);
    std::shared_ptr<const SceneScripts> scripts;
    if (needs_scripts) {
      if (!scripts_dir) {
        throw IoError("the oracle propagator needs motion scripts (--scripts)");
      }
      const fs::path p = *scripts_dir / (v + ".json");
      if (!fs::exists(p)) throw IoError("video " + v + ": missing " + p.string());
      scripts = std::make_shared<const SceneScripts>(ScriptsFromJson(ReadJsonFile(p)));
    }
    auto propagator = MakePropagator(o.propagator, scripts);
    const PipelineResult r = RunOnVideo(proposals, o.config.pipeline, *propagator);

    const fs::path dir = out_root / v;
    if (fs::exists(dir)) fs::remove_all(dir);
    WriteVideo(dir, r.frames);
    json tracks = TracksToJson(r.tracks);
    tracks["video"] = v;
    tracks["mode"] = mode;
    tracks["merge_frames"] = r.merge_frames;
    tracks["warnings"] = r.warnings;
    WriteJsonFile(dir / "tracks.json", tracks);
    warnings[i] = r.warnings;
    for (const auto& w : r.warnings) Log().warn("{}: {}", v, w);
  });

  size_t num_warnings = 0;
  for (const auto& w : warnings) num_warnings += w.size();
  WriteJsonFile(out_root / "run.json",
                json{{"mode", mode},
                     {"propagator", o.propagator},
                     {"pipeline", PipelineToJson(o.config.pipeline)},
                     {"videos", videos},
                     {"warnings", num_warnings}});
}

std::vector<int> ParseWindows(const std::string& text) {
  std::vector<int> windows;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item == "inf" || item == "∞") {
      windows.push_back(kWholeVideo);
      continue;
    }
    size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty() || k < 1) {
      throw std::invalid_argument("invalid window '" + item +
                                  "' (expected a positive integer or inf)");
    }
    windows.push_back(k);
  }
  if (windows.empty()) throw std::invalid_argument("no windows given");
  std::vector<int> unique;
  for (int w : windows) {
    if (std::find(unique.begin(), unique.end(), w) == unique.end()) unique.push_back(w);
  }
  return unique;
}

json CmdEval(const EvalOptions& o) {
  const bool bundle = IsBundle(o.gt);
  const fs::path gt_root = bundle ? o.gt / "gt" : o.gt;
  const std::vector<std::string> videos =
      bundle ? BundleVideos(o.gt) : ListVideos(gt_root);
  if (videos.empty()) throw IoError("no ground-truth videos under " + gt_root.string());

  // (row name, directory of videos)
  std::vector<std::pair<std::string, fs::path>> rows;
  for (const auto& p : o.preds) {
    if (!fs::is_directory(p)) throw IoError("not a directory: " + p.string());
    if (!ListVideos(p).empty()) {
      rows.emplace_back(p.filename().string(), p);
      continue;
    }
    std::vector<fs::path> subs;
    for (const auto& e : fs::directory_iterator(p)) {
      if (fs::is_directory(e.path()) && !ListVideos(e.path()).empty()) {
        subs.push_back(e.path());
      }
    }
    std::sort(subs.begin(), subs.end());
    if (subs.empty()) throw IoError("no predicted videos under " + p.string());
    for (const auto& s : subs) rows.emplace_back(s.filename().string(), s);
  }

  const std::set<std::string> expected(videos.begin(), videos.end());
  for (const auto& [name, dir] : rows) {
    const auto found = ListVideos(dir);
    const std::set<std::string> have(found.begin(), found.end());
    std::vector<std::string> missing, extra;
    std::set_difference(expected.begin(), expected.end(), have.begin(),
                        have.end(), std::back_inserter(missing));
    std::set_difference(have.begin(), have.end(), expected.begin(),
                        expected.end(), std::back_inserter(extra));
    if (!missing.empty() || !extra.empty()) {
      std::string msg = "inventory mismatch for " + dir.string();
      if (!missing.empty()) msg += "; missing videos: " + Join(missing);
      if (!extra.empty()) msg += "; unexpected videos: " + Join(extra);
      throw IoError(msg);
    }
  }

  std::vector<TrackedVideo> gts(videos.size());
  ParallelFor(static_cast<int>(videos.size()), o.jobs,
              [&](int i) { gts[i] = ReadVideo(gt_root / videos[i]); });

  std::vector<std::string> keys = {"pq"};
  for (int w : o.windows) keys.push_back("vpq_" + WindowKey(w));
  for (const char* k : {"vpq_bar", "stq", "aq", "sq", "owta", "det_re", "ass_a"}) {
    keys.emplace_back(k);
  }

  json out_rows = json::array();
  for (const auto& [name, dir] : rows) {
    std::vector<json> per(videos.size());
    ParallelFor(static_cast<int>(videos.size()), o.jobs, [&](int i) {
      const TrackedVideo pred = ReadVideo(dir / videos[i]);
      if (pred.size() != gts[i].size()) {
        throw IoError("video " + videos[i] + ": " + std::to_string(pred.size()) +
                      " predicted frames vs " + std::to_string(gts[i].size()) +
                      " ground-truth frames");
      }
      per[i] = VideoMetrics(Evaluate(pred, gts[i], o.windows), o.windows);
    });
    json metrics;
    for (const auto& k : keys) {
      double sum = 0.0;
      int count = 0;
      for (const auto& m : per) {
        if (!m.at(k).is_null()) {
          sum += m.at(k).get<double>();
          ++count;
        }
      }
      metrics[k] = count ? json(sum / count) : json(nullptr);
    }
    json per_video;
    for (size_t i = 0; i < videos.size(); ++i) per_video[videos[i]] = per[i];
    out_rows.push_back(
        {{"name", name}, {"metrics", std::move(metrics)}, {"videos", std::move(per_video)}});
  }

  std::vector<std::string> ks;
  for (int w : o.windows) ks.push_back(WindowKey(w));
  return json{{"ks", ks}, {"num_videos", videos.size()}, {"rows", std::move(out_rows)}};
}

std::string FormatReportTable(const json& report) {
  std::vector<std::pair<std::string, std::string>> cols;
  for (const auto& k : report.at("ks")) {
    const std::string key = k.get<std::string>();
    cols.emplace_back("VPQ" + key, "vpq_" + key);
  }
  for (const auto& [h, k] : std::vector<std::pair<std::string, std::string>>{
           {"VPQbar", "vpq_bar"}, {"STQ", "stq"}, {"PQ", "pq"}, {"OWTA", "owta"}}) {
    cols.emplace_back(h, k);
  }
  size_t name_w = 6;
  for (const auto& row : report.at("rows")) {
    name_w = std::max(name_w, row.at("name").get<std::string>().size());
  }
  std::ostringstream os;
  char buf[64];
  os << std::string("method") << std::string(name_w - 6, ' ');
  for (const auto& [h, k] : cols) {
    std::snprintf(buf, sizeof(buf), " %8s", h.c_str());
    os << buf;
  }
  os << "\n";
  for (const auto& row : report.at("rows")) {
    const std::string name = row.at("name").get<std::string>();
    os << name << std::string(name_w - name.size(), ' ');
    const json& m = row.at("metrics");
    for (const auto& [h, k] : cols) {
      if (!m.contains(k) || m.at(k).is_null()) {
        std::snprintf(buf, sizeof(buf), " %8s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), " %8.1f", m.at(k).get<double>());
      }
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

json CmdInspect(const InspectOptions& o) {
  if (!fs::is_directory(o.clip)) throw IoError("not a directory: " + o.clip.string());
  static const std::regex kFrameName(R"((\d+)\.json)");
  std::vector<int> frames;
  for (const auto& e : fs::directory_iterator(o.clip)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, kFrameName)) frames.push_back(std::stoi(m[1]));
  }
  std::sort(frames.begin(), frames.end());
  if (frames.empty()) throw IoError("no frames under " + o.clip.string());
  std::vector<Segmentation> clip;
  for (int t : frames) clip.push_back(ReadFrame(o.clip, t));

  std::shared_ptr<const SceneScripts> scripts;
  if (o.scripts) {
    scripts = std::make_shared<const SceneScripts>(
        ScriptsFromJson(ReadJsonFile(*o.scripts)));
  }
  const auto aligner = MakePropagator(o.propagator, scripts);
  const ConsensusConfig cc = o.config.pipeline.consensus();
  const ConsensusTrace trace = TraceConsensus(clip, aligner.get(), cc);

  json proposals = json::array();
  for (size_t i = 0; i < trace.pool.size(); ++i) {
    const Proposal& p = trace.pool[i];
    std::string verdict = "passthrough";
    if (!trace.passthrough) verdict = trace.solution.selected[i] ? "select" : "reject";
    proposals.push_back(
        {{"index", i},
         {"source_frame", frames.front() + p.source_frame_offset},
         {"source_id", p.source_segment_id},
         {"class", p.class_label ? json(*p.class_label) : json(nullptr)},
         {"area", p.mask.area()},
         {"weight", trace.passthrough ? json(nullptr)
                                      : json(trace.graph.graph.weights[i])},
         {"verdict", verdict}});
  }
  json edges = json::array();
  for (const auto& e : trace.graph.edges) {
    edges.push_back({{"a", e.a}, {"b", e.b}, {"iou", e.iou}});
  }
  json output = json::array();
  for (const auto& s : trace.output.segments) {
    output.push_back({{"id", s.id}, {"area", s.mask.area()}});
  }
  return json{{"target_frame", frames.front()},
              {"clip_frames", frames},
              {"passthrough", trace.passthrough},
              {"alpha", cc.alpha},
              {"theta", cc.theta},
              {"aligner", cc.spatial_alignment ? aligner->Name() : "none"},
              {"proposals", std::move(proposals)},
              {"edges", std::move(edges)},
              {"objective", trace.passthrough ? json(nullptr)
                                              : json(trace.solution.objective)},
              {"greedy_components", trace.solution.greedy_components},
              {"output", std::move(output)}};
}

std::string FormatInspect(const json& d) {
  std::ostringstream os;
  char buf[160];
  os << "target frame " << d.at("target_frame").get<int>() << ", clip frames";
  for (const auto& t : d.at("clip_frames")) os << " " << t.get<int>();
  std::snprintf(buf, sizeof(buf), ", alpha %.3g, theta %.3g, aligner %s\n",
                d.at("alpha").get<double>(), d.at("theta").get<double>(),
                d.at("aligner").get<std::string>().c_str());
  os << buf;
  os << "proposals:\n";
  std::snprintf(buf, sizeof(buf), "  %4s %6s %6s %6s %8s %9s  %s\n", "#", "frame",
                "src", "class", "area", "weight", "verdict");
  os << buf;
  for (const auto& p : d.at("proposals")) {
    const std::string cls =
        p.at("class").is_null() ? "-" : std::to_string(p.at("class").get<int>());
    std::string weight = "-";
    if (!p.at("weight").is_null()) {
      std::snprintf(buf, sizeof(buf), "%.4f", p.at("weight").get<double>());
      weight = buf;
    }
    std::snprintf(buf, sizeof(buf), "  %4d %6d %6lld %6s %8lld %9s  %s\n",
                  p.at("index").get<int>(), p.at("source_frame").get<int>(),
                  static_cast<long long>(p.at("source_id").get<int64_t>()),
                  cls.c_str(), static_cast<long long>(p.at("area").get<int64_t>()),
                  weight.c_str(), p.at("verdict").get<std::string>().c_str());
    os << buf;
  }
  os << "edges:" << (d.at("edges").empty() ? " none\n" : "\n");
  for (const auto& e : d.at("edges")) {
    std::snprintf(buf, sizeof(buf), "  %d -- %d  iou %.4f\n", e.at("a").get<int>(),
                  e.at("b").get<int>(), e.at("iou").get<double>());
    os << buf;
  }
  if (d.at("objective").is_null()) {
    os << "objective: n/a (single-frame clip passes through)\n";
  } else {
    std::snprintf(buf, sizeof(buf), "objective: %.6g%s\n",
                  d.at("objective").get<double>(),
                  d.at("greedy_components").get<int>() > 0 ? " (greedy fallback used)"
                                                           : " (exact)");
    os << buf;
  }
  os << "output segments: " << d.at("output").size() << "\n";
  return os.str();
}

}  // namespace devafuse
