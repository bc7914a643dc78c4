// Copyright 2026 The SpoofKit Authors
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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spoofkit/cli_commands.hpp"
#include "spoofkit/errors.hpp"

namespace {

using namespace spoofkit;
using namespace spoofkit::cli;

// "START:END" in Hz.
BandSpec parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw CLI::ValidationError("--band", "expected START:END in Hz");
  }
  try {
    return BandSpec{std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--band", "expected numeric START:END");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spoofkit: artifact-centric audio anti-spoofing pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> jobs_flag;
  app.add_option("--config", config_path, "pipeline config file (JSON)");
  app.add_option("--seed", seed_flag, "master seed (overrides config and environment)");
  app.add_option("--jobs", jobs_flag, "worker threads for per-file stages");

  PipelineConfig cfg;

  // import
  auto* import_cmd = app.add_subcommand("import", "build a native manifest");
  ImportArgs import_args;
  import_cmd->add_option("--asvspoof", import_args.asvspoof_protocol,
                         "protocol file (speaker file - - bonafide|spoof)");
  import_cmd->add_option("--audio-root", import_args.audio_root, "directory with the audio files");
  import_cmd->add_option("--ext", import_args.ext, "audio extension appended to file names");
  import_cmd->add_option("--tsv", import_args.tsv, "validate and normalize an existing manifest");
  import_cmd->add_option("--out", import_args.out, "output manifest path");

  // split
  auto* split_cmd = app.add_subcommand("split", "stratified train/val/test split");
  SplitArgs split_args;
  std::vector<double> fractions{0.7, 0.2, 0.1};
  split_cmd->add_option("--manifest", split_args.manifest, "input manifest")->required();
  split_cmd->add_option("--fractions", fractions, "train val test fractions")->expected(3);
  split_cmd->add_option("--out-dir", split_args.out_dir, "output directory");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate artifact clips from fake/real pairs");
  GenArgs gen_args;
  std::string gen_kind;
  std::string gen_band;
  std::optional<double> gen_alpha;
  gen_cmd->add_option("--manifest", gen_args.manifest, "manifest with real and fake records")
      ->required();
  gen_cmd->add_option("--kind", gen_kind,
                      "fixed_freq | time_segment | dynamic_freq | background_noise");
  gen_cmd->add_option("--band", gen_band, "fixed_freq band as START:END in Hz");
  gen_cmd->add_option("--alpha", gen_alpha, "background noise level (0, 1)");
  gen_cmd->add_option("--out-dir", gen_args.out_dir, "output directory for clips");
  gen_cmd->add_option("--manifest-out", gen_args.manifest_out,
                      "artifact manifest path (default OUT_DIR/manifest.tsv)");

  // featurize
  auto* feat_cmd = app.add_subcommand("featurize", "standardize clips and write MELF features");
  FeaturizeArgs feat_args;
  feat_cmd->add_option("--manifest", feat_args.manifest, "input manifest")->required();
  feat_cmd->add_option("--out-dir", feat_args.out_dir, "feature directory");
  feat_cmd->add_option("--render-dir", feat_args.render_dir,
                       "also render each spectrogram as a 299x299 PNG here");

  // train
  auto* train_cmd = app.add_subcommand("train", "run the staged training protocol");
  TrainArgs train_args;
  train_cmd->add_option("--manifest", train_args.manifest, "manifest with real and fake records")
      ->required();
  train_cmd->add_option("--artifact-manifest", train_args.artifact_manifest,
                        "manifest with artifact records");
  train_cmd->add_option("--features", train_args.features, "feature directory");
  train_cmd->add_option("--stage", train_args.stage, "all | baseline | adm | final");
  train_cmd->add_option("--out-dir", train_args.out_dir, "checkpoint directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a split and write a metric report");
  EvalArgs eval_args;
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint (.spfw)")
      ->required();
  eval_cmd->add_option("--manifest", eval_args.manifest, "manifest to score")->required();
  eval_cmd->add_option("--artifact-manifest", eval_args.artifact_manifest,
                       "artifact manifest (adm task)");
  eval_cmd->add_option("--task", eval_args.task, "main | adm");
  eval_cmd->add_option("--features", eval_args.features, "feature directory");
  eval_cmd->add_option("--report", eval_args.report_out, "report JSON path");
  eval_cmd->add_option("--scores", eval_args.scores_out, "scores CSV path");

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "export dense-128 embeddings as CSV");
  EmbedArgs embed_args;
  embed_cmd->add_option("--checkpoint", embed_args.checkpoint, "model checkpoint (.spfw)")
      ->required();
  embed_cmd->add_option("--manifest", embed_args.manifest, "manifest to embed")->required();
  embed_cmd->add_option("--features", embed_args.features, "feature directory");
  embed_cmd->add_option("--out", embed_args.out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints help/message
    return kExitUsage;
  }

  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    apply_env_overrides(cfg);
    if (seed_flag) {
      cfg.seed = *seed_flag;
      cfg.artifact.seed = *seed_flag;
      cfg.train.seed = *seed_flag;
    }
    if (jobs_flag) cfg.jobs = *jobs_flag;

    if (import_cmd->parsed()) return cmd_import(import_args);

    if (split_cmd->parsed()) {
      split_args.fractions = {fractions[0], fractions[1], fractions[2]};
      split_args.seed = cfg.seed;
      return cmd_split(split_args);
    }

    if (gen_cmd->parsed()) {
      gen_args.artifact = cfg.artifact;
      if (!gen_kind.empty()) {
        try {
          gen_args.artifact.kind = artifact_kind_from_name(gen_kind);
        } catch (const ValidationError& e) {
          std::cerr << "gen: " << e.what() << "\n";
          return kExitUsage;
        }
      }
      if (!gen_band.empty()) gen_args.artifact.band = parse_band(gen_band);
      if (gen_alpha) gen_args.artifact.noise_alpha = *gen_alpha;
      gen_args.artifact.seed = cfg.seed;
      gen_args.params.standardize_seconds = cfg.standardize_seconds;
      gen_args.params.standardize_rate = cfg.standardize_rate;
      gen_args.params.jobs = cfg.jobs;
      return cmd_gen(gen_args);
    }

    if (feat_cmd->parsed()) {
      feat_args.standardize_seconds = cfg.standardize_seconds;
      feat_args.standardize_rate = cfg.standardize_rate;
      feat_args.mel = cfg.mel;
      feat_args.jobs = cfg.jobs;
      return cmd_featurize(feat_args);
    }

    if (train_cmd->parsed()) {
      train_args.train = cfg.train;
      train_args.train.seed = cfg.seed;
      return cmd_train(train_args);
    }

    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (embed_cmd->parsed()) return cmd_embed(embed_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const MissingInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  return kExitUsage;
}
