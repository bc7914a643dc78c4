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

#ifndef SPOOFKIT_CONFIG_HPP_
#define SPOOFKIT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>

#include "spoofkit/artifact_gen.hpp"
#include "spoofkit/model.hpp"
#include "spoofkit/spectral.hpp"

namespace spoofkit {

// Whole-pipeline settings. Precedence, lowest to highest: built-in defaults,
// config file, SPOOFKIT_* environment variables, command-line flags.
struct PipelineConfig {
  std::filesystem::path corpus_root;
  std::filesystem::path work_dir = ".";
  double standardize_seconds = 3.0;
  int standardize_rate = 16000;
  MelParams mel;
  ArtifactConfig artifact;
  TrainConfig train;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Strict JSON load: unknown keys anywhere are rejected. The artifact and
// train seeds default to the pipeline seed unless given explicitly.
PipelineConfig load_config(const std::filesystem::path& path);

// Environment overrides: SPOOFKIT_SEED, SPOOFKIT_JOBS, SPOOFKIT_WORK_DIR.
void apply_env_overrides(PipelineConfig& cfg);

}  // namespace spoofkit

#endif  // SPOOFKIT_CONFIG_HPP_
