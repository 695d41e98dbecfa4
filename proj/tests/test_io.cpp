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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "devafuse/bench.hpp"
#include "devafuse/commands.hpp"
#include "devafuse/io.hpp"
#include "oracles.hpp"

using namespace devafuse;
using namespace devafuse::testing;
namespace fs = std::filesystem;

namespace {

const std::string kCli = DEVAFUSE_CLI_PATH;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("devafuse-" + tag + "-" + std::to_string(getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under `root`, relative path -> bytes.
std::map<std::string, std::string> Snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = Slurp(e.path());
  }
  return out;
}

int Shell(const std::string& cmd) {
  const int status = std::system((cmd + " 2>/dev/null >/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Config TinyConfig() {
  Config c = ParseConfig(R"(
scene:
  width: 48
  height: 36
  num_frames: 12
  num_objects: 3
  min_size: 8
  max_size: 14
noise:
  dropout: 0.1
  spurious_rate: 0.3
  jitter: 1
benchmark:
  videos: 2
  seed: 5
)", "tiny.yaml");
  return c;
}

}  // namespace

TEST_CASE("frame files round trip") {
  TempDir tmp("frames");
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    Segmentation s = RandomSegmentation(rng, t, 23, 17, 5, 4);
    for (auto& seg : s.segments) {
      seg.id = seg.id * 977;  // beyond 8 bits
      if (t % 2) seg.confidence = 0.25 * (seg.id % 4);
      if (t % 3 == 0) seg.class_label.reset();
    }
    std::sort(s.segments.begin(), s.segments.end(),
              [](const Segment& a, const Segment& b) { return a.id < b.id; });
    WriteFrame(tmp.path, s);
    CHECK(ReadFrame(tmp.path, t) == s);
  }
  CHECK(FrameStem(7) == "00007");
}

TEST_CASE("ids beyond the PNG range are rejected") {
  TempDir tmp("bigid");
  Segmentation s = EmptySegmentation(0, 4, 4);
  s.segments.push_back({70000, BinaryMask::FromBox(4, 4, {0, 0, 2, 2}), 1, {}});
  CHECK_THROWS_AS(WriteFrame(tmp.path, s), IoError);
}

TEST_CASE("videos round trip and missing frames are reported") {
  TempDir tmp("video");
  std::mt19937_64 rng(62);
  TrackedVideo v;
  for (int t = 0; t < 5; ++t) v.push_back(RandomSegmentation(rng, t, 12, 10, 3, 2));
  WriteVideo(tmp.path, v);
  CHECK(ReadVideo(tmp.path) == v);
  CHECK(ReadVideoMeta(tmp.path).num_frames == 5);
  CHECK(MissingFrameFiles(tmp.path).empty());
  fs::remove(tmp.path / "00003.png");
  REQUIRE(MissingFrameFiles(tmp.path).size() == 1);
  try {
    ReadVideo(tmp.path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.exit_code() == kExitMissingFrame);
    CHECK(std::string(e.what()).find("missing frame 3") != std::string::npos);
  }
}

TEST_CASE("scripts round trip") {
  SceneConfig sc;
  sc.num_frames = 10;
  sc.seed = 9;
  const SyntheticVideo v = GenerateScene(sc);
  const SceneScripts back = ScriptsFromJson(ScriptsToJson(v.scripts));
  for (int t = 0; t < 10; ++t) CHECK(back.GroundTruth(t) == v.scripts.GroundTruth(t));
}

TEST_CASE("config parsing and diagnostics") {
  const Config c = TinyConfig();
  CHECK(c.scene.width == 48);
  CHECK(c.benchmark.videos == 2);
  CHECK(ParseConfig(ConfigToYaml(c), "again").scene.num_frames == 12);

  const Config online = ParseConfig("pipeline:\n  mode: online\n", "x");
  CHECK(online.pipeline.clip_size == 1);

  auto error_of = [](const std::string& text) {
    try {
      ParseConfig(text, "cfg.yaml");
    } catch (const std::exception& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("pipeline:\n  bogus: 1\n").find("cfg.yaml:2:3: unknown key 'pipeline.bogus'") !=
        std::string::npos);
  CHECK(error_of("extras:\n  a: 1\n").find("cfg.yaml:1:1") != std::string::npos);
  CHECK_FALSE(error_of("pipeline:\n  clip_size: 0\n").empty());
  CHECK_FALSE(error_of("pipeline:\n  mode: online\n  clip_size: 3\n").empty());
  CHECK_FALSE(error_of("scene: [1, 2\n").empty());
}

TEST_CASE("json syntax errors carry a position") {
  TempDir tmp("json");
  WriteTextFile(tmp.path / "bad.json", "{\n  \"a\": ,\n}\n");
  try {
    ReadJsonFile(tmp.path / "bad.json");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("bad.json:2:") != std::string::npos);
  }
}

TEST_CASE("synth, run and eval are reproducible end to end") {
  TempDir tmp("e2e");
  const Config cfg = TinyConfig();
  CmdSynth(cfg, tmp.path / "bundle", 2);
  CmdSynth(cfg, tmp.path / "bundle2", 1);
  CHECK(Snapshot(tmp.path / "bundle") == Snapshot(tmp.path / "bundle2"));
  CHECK(fs::exists(tmp.path / "bundle" / "scripts" / "v001.json"));

  RunOptions ro;
  ro.input = tmp.path / "bundle";
  ro.config = cfg;
  ro.out = tmp.path / "out";
  ro.jobs = 2;
  CmdRun(ro);
  ro.config.pipeline = PipelineConfig::ForMode(PipelineMode::kMaskIouBaseline);
  CmdRun(ro);
  const fs::path semi = tmp.path / "out" / "semi_online";
  CHECK(fs::exists(semi / "v000" / "tracks.json"));
  CHECK(fs::exists(semi / "run.json"));
  CHECK(ReadVideo(semi / "v001").size() == 12);

  EvalOptions eo;
  eo.gt = tmp.path / "bundle";
  eo.preds = {tmp.path / "out"};
  const nlohmann::json report = CmdEval(eo);
  REQUIRE(report.at("rows").size() == 2);
  CHECK(report.at("num_videos") == 2);
  for (const auto& row : report.at("rows")) {
    CHECK(row.at("metrics").at("vpq_bar").is_number());
    CHECK(row.at("videos").size() == 2);
  }
  const std::string table = FormatReportTable(report);
  CHECK(table.find("VPQbar") != std::string::npos);
  CHECK(table.find("semi_online") != std::string::npos);

  // Perfect predictions score 100.
  EvalOptions self;
  self.gt = tmp.path / "bundle";
  self.preds = {tmp.path / "bundle" / "gt"};
  const auto perfect = CmdEval(self).at("rows").at(0).at("metrics");
  CHECK(perfect.at("vpq_bar").get<double>() == doctest::Approx(100.0));
  CHECK(perfect.at("stq").get<double>() == doctest::Approx(100.0));

  // Inventory mismatch.
  fs::remove_all(semi / "v001");
  EvalOptions bad = eo;
  bad.preds = {semi};
  try {
    CmdEval(bad);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("v001") != std::string::npos);
  }
}

TEST_CASE("inspect reports consensus verdicts") {
  TempDir tmp("inspect");
  const BinaryMask box = BinaryMask::FromBox(20, 20, {2, 2, 10, 10});
  for (int t = 0; t < 3; ++t) {
    Segmentation s = EmptySegmentation(t, 20, 20);
    s.segments.push_back({1, box, 1, 0.9});
    if (t == 1) s.segments.push_back({2, BinaryMask::FromBox(20, 20, {14, 14, 18, 18}), 2, 0.5});
    WriteFrame(tmp.path, s);
  }
  InspectOptions io;
  io.clip = tmp.path;
  const nlohmann::json dump = CmdInspect(io);
  CHECK(dump.at("target_frame") == 0);
  CHECK(dump.at("objective").get<double>() == doctest::Approx(1.5));
  std::map<std::string, int> verdicts;
  for (const auto& p : dump.at("proposals")) ++verdicts[p.at("verdict").get<std::string>()];
  CHECK(verdicts["select"] == 1);
  CHECK(verdicts["reject"] == 3);
  for (const auto& p : dump.at("proposals")) {
    if (p.at("source_id") == 2) CHECK(p.at("weight").get<double>() == doctest::Approx(-0.5));
  }
  CHECK_FALSE(FormatInspect(dump).empty());

  fs::remove(tmp.path / "00001.png");
  fs::remove(tmp.path / "00001.json");
  fs::remove(tmp.path / "00002.png");
  fs::remove(tmp.path / "00002.json");
  const nlohmann::json single = CmdInspect(io);
  REQUIRE(single.at("proposals").size() == 1);
  CHECK(single.at("proposals")[0].at("verdict") == "passthrough");
}

TEST_CASE("command line interface") {
  TempDir tmp("cli");
  const std::string d = tmp.path.string();
  WriteTextFile(tmp.path / "tiny.yaml", ConfigToYaml(TinyConfig()));
  const std::string cfg = " --config " + d + "/tiny.yaml";
  REQUIRE(Shell(kCli + " synth --out " + d + "/b" + cfg) == 0);
  REQUIRE(Shell(kCli + " run " + d + "/b --out " + d + "/o" + cfg + " --jobs 2") == 0);
  REQUIRE(Shell(kCli + " run " + d + "/b --out " + d + "/o --mode mask_iou_baseline" + cfg) == 0);
  REQUIRE(Shell(kCli + " eval --gt " + d + "/b --pred " + d + "/o --json " + d +
                "/r1.json") == 0);
  REQUIRE(Shell(kCli + " eval --gt " + d + "/b --pred " + d + "/o --json " + d +
                "/r2.json") == 0);
  CHECK(Slurp(tmp.path / "r1.json") == Slurp(tmp.path / "r2.json"));
  const auto report = ReadJsonFile(tmp.path / "r1.json");
  CHECK(report.at("rows").size() == 2);

  // Unknown propagator, bad config key, missing frame.
  CHECK(Shell(kCli + " run " + d + "/b --out " + d + "/x --propagator warp" + cfg) == 1);
  WriteTextFile(tmp.path / "bad.yaml", "pipeline:\n  clip: 3\n");
  CHECK(Shell(kCli + " run " + d + "/b --out " + d + "/x --config " + d + "/bad.yaml") == 1);
  fs::remove(tmp.path / "b" / "proposals" / "v000" / "00004.png");
  CHECK(Shell(kCli + " run " + d + "/b --out " + d + "/x" + cfg) == kExitMissingFrame);
  CHECK(Shell(kCli + " run " + d + "/b --out " + d + "/x --mode offline_soft" + cfg) != 0);
}
