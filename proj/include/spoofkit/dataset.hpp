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

#ifndef SPOOFKIT_DATASET_HPP_
#define SPOOFKIT_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spoofkit/spectral.hpp"

namespace spoofkit {

enum class Label { real, fake, artifact };

const char* label_name(Label l);
Label label_from_name(const std::string& name);  // throws ValidationError

struct SampleRecord {
  std::string file_id;
  std::filesystem::path path;
  std::string speaker_id;
  Label label = Label::real;
};

struct Manifest {
  std::vector<SampleRecord> records;
};

// Native manifest: TSV, four columns (file_id, path, speaker_id, label),
// UTF-8, no header. Duplicate file_ids and unknown labels are rejected.
Manifest parse_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& m, const std::filesystem::path& path);

// ASVspoof-style protocol import: whitespace-delimited lines
//   speaker_id file_name <ignored> <ignored> key
// with key in {bonafide, spoof}; paths become audio_root/file_name + ext.
Manifest import_asvspoof_protocol(const std::filesystem::path& protocol,
                                  const std::filesystem::path& audio_root,
                                  const std::string& ext = ".wav");

// Deterministic label-stratified split; each split keeps the per-label
// counts within one record of the ideal fractional allocation.
std::array<Manifest, 3> split_random(const Manifest& m, const std::array<double, 3>& fractions,
                                     std::uint64_t seed);

struct SpeakerGroup {
  std::vector<SampleRecord> reals;
  std::vector<SampleRecord> fakes;
  std::vector<SampleRecord> artifacts;
};

// Groups records by speaker id. Speakers with an empty side are kept; the
// caller decides whether to skip them.
std::map<std::string, SpeakerGroup> speaker_pairs(const Manifest& m);

enum class Task {
  main,  // real (1) vs fake (0)
  adm,   // artifact (1) vs fake (0)
};

struct LabeledExample {
  std::string file_id;
  int label = 0;
  MelSpectrogram features;
};

using TaskView = std::vector<LabeledExample>;

// Materializes a labeled feature list for one task from feature files named
// <file_id>.melf under features_dir. Records outside the task's two classes
// are ignored. Throws MissingInputError listing absent ids and
// ValidationError if a class is empty.
TaskView build_task_view(const std::vector<const Manifest*>& manifests, Task task,
                         const std::filesystem::path& features_dir);

}  // namespace spoofkit

#endif  // SPOOFKIT_DATASET_HPP_
