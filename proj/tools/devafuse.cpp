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

// devafuse: synth | run | eval | inspect

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "devafuse/commands.hpp"
#include "devafuse/io.hpp"
#include "devafuse/log.hpp"

using namespace devafuse;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<uint64_t> seed;
  int jobs = 1;
};

Config ResolveConfig(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : LoadConfig(c.config_path);
  if (c.mode) {
    const PipelineMode m = ParseMode(*c.mode);
    if (m != cfg.pipeline.mode) {
      const PipelineConfig defaults = PipelineConfig::ForMode(m);
      cfg.pipeline.mode = m;
      if (m == PipelineMode::kOnline) cfg.pipeline.clip_size = defaults.clip_size;
    }
  }
  if (c.seed) cfg.benchmark.seed = *c.seed;
  cfg.pipeline.Validate();
  return cfg;
}

void AddCommon(CLI::App* app, Common& c, bool with_mode) {
  app->add_option("--config", c.config_path, "YAML configuration file")
      ->check(CLI::ExistingFile);
  if (with_mode) {
    app->add_option("--mode", c.mode,
                    "online | semi_online | mask_iou_baseline | short_track | "
                    "trust_image_seg");
  }
  app->add_option("--seed", c.seed, "benchmark seed (overrides the config)");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoupled video segmentation fusion"};
  app.require_subcommand(1);

  Common synth_c;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark bundle");
  AddCommon(synth, synth_c, false);
  synth->add_option("--out", synth_out, "bundle directory")->required();

  Common run_c;
  RunOptions run;
  std::string run_scripts;
  auto* run_cmd = app.add_subcommand("run", "run a pipeline over every video");
  AddCommon(run_cmd, run_c, true);
  run_cmd->add_option("input", run.input, "bundle or directory of videos")
      ->required()
      ->check(CLI::ExistingDirectory);
  run_cmd->add_option("--propagator", run.propagator,
                      "identity | oracle | external:<command>");
  run_cmd->add_option("--scripts", run_scripts,
                      "motion scripts directory for non-bundle inputs");
  run_cmd->add_option("--out", run.out, "output root")->required();

  Common eval_c;
  EvalOptions eval;
  std::string ks = "1,2,4,6,8,10,inf";
  std::string eval_json;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
  AddCommon(eval_cmd, eval_c, false);
  eval_cmd->add_option("--gt", eval.gt, "bundle or ground-truth video directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--pred", eval.preds, "prediction directory (repeatable)")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--ks", ks, "VPQ window sizes");
  eval_cmd->add_option("--json", eval_json, "write the report JSON here (default: stdout)");

  Common insp_c;
  InspectOptions insp;
  std::string insp_scripts;
  bool insp_json = false;
  auto* insp_cmd = app.add_subcommand("inspect", "dump the consensus of one clip");
  AddCommon(insp_cmd, insp_c, false);
  insp_cmd->add_option("clip", insp.clip, "directory of clip frames")
      ->required()
      ->check(CLI::ExistingDirectory);
  insp_cmd->add_option("--propagator", insp.propagator,
                       "aligner: identity | oracle | external:<command>");
  insp_cmd->add_option("--scripts", insp_scripts, "motion scripts file for the oracle");
  insp_cmd->add_flag("--json", insp_json, "print JSON instead of text");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      CmdSynth(ResolveConfig(synth_c), synth_out, synth_c.jobs);
    } else if (run_cmd->parsed()) {
      run.config = ResolveConfig(run_c);
      run.jobs = run_c.jobs;
      if (!run_scripts.empty()) run.scripts = run_scripts;
      CmdRun(run);
    } else if (eval_cmd->parsed()) {
      eval.windows = ParseWindows(ks);
      eval.jobs = eval_c.jobs;
      const nlohmann::json report = CmdEval(eval);
      if (eval_json.empty()) {
        std::cout << report.dump(2) << "\n";
        std::cerr << FormatReportTable(report);
      } else {
        WriteJsonFile(eval_json, report);
        std::cout << FormatReportTable(report);
      }
    } else if (insp_cmd->parsed()) {
      insp.config = ResolveConfig(insp_c);
      if (!insp_scripts.empty()) insp.scripts = insp_scripts;
      const nlohmann::json dump = CmdInspect(insp);
      std::cout << (insp_json ? dump.dump(2) + "\n" : FormatInspect(dump));
    }
  } catch (const IoError& e) {
    Log().error("{}", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    Log().error("{}", e.what());
    return 1;
  }
  return 0;
}
