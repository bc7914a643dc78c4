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

#ifndef SPOOFKIT_CLI_COMMANDS_HPP_
#define SPOOFKIT_CLI_COMMANDS_HPP_

#include <filesystem>
#include <string>

#include "spoofkit/config.hpp"

namespace spoofkit::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitMissing = 4;
inline constexpr int kExitUsage = 64;

struct ImportArgs {
  std::filesystem::path asvspoof_protocol;  // one of protocol/tsv must be set
  std::filesystem::path audio_root;
  std::string ext = ".wav";
  std::filesystem::path tsv;  // validate + normalize an existing manifest
  std::filesystem::path out = "manifest.tsv";
};

struct SplitArgs {
  std::filesystem::path manifest;
  std::array<double, 3> fractions{0.7, 0.2, 0.1};
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
};

struct GenArgs {
  std::filesystem::path manifest;
  ArtifactConfig artifact;
  GenParams params;
  std::filesystem::path out_dir = "artifacts";
  std::filesystem::path manifest_out;  // defaults to out_dir/manifest.tsv
};

struct FeaturizeArgs {
  std::filesystem::path manifest;
  std::filesystem::path out_dir = "features";
  std::filesystem::path render_dir;  // optional 299x299 PNG export
  double standardize_seconds = 3.0;
  int standardize_rate = 16000;
  MelParams mel;
  int jobs = 1;
};

struct TrainArgs {
  std::filesystem::path manifest;           // real + fake records
  std::filesystem::path artifact_manifest;  // artifact records
  std::filesystem::path features = "features";
  std::string stage = "all";  // all | baseline | adm | final
  std::filesystem::path out_dir = "checkpoints";
  TrainConfig train;
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  std::filesystem::path artifact_manifest;  // optional, for the adm task
  std::string task = "main";                // main | adm
  std::filesystem::path features = "features";
  std::filesystem::path report_out = "report.json";
  std::filesystem::path scores_out;  // optional
};

struct EmbedArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  std::filesystem::path features = "features";
  std::filesystem::path out = "embeddings.csv";
};

int cmd_import(const ImportArgs& args);
int cmd_split(const SplitArgs& args);
int cmd_gen(const GenArgs& args);
int cmd_featurize(const FeaturizeArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_embed(const EmbedArgs& args);

}  // namespace spoofkit::cli

#endif  // SPOOFKIT_CLI_COMMANDS_HPP_
