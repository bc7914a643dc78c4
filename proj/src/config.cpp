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

#include "spoofkit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ValidationError(std::string("config: unknown key '") + key + "' in " + where);
    }
  }
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("config: no such file: " + path.string());
  }
  std::ifstream f(path);
  if (!f) throw IoError("config: cannot open " + path.string());

  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ParseError("config: " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");

  PipelineConfig cfg;
  bool artifact_seed_set = false;
  bool train_seed_set = false;
  try {
    reject_unknown(j, {"paths", "standardize", "mel", "artifact", "train", "seed", "jobs"},
                   "top level");
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      reject_unknown(p, {"corpus_root", "work_dir"}, "paths");
      if (p.contains("corpus_root")) cfg.corpus_root = p["corpus_root"].get<std::string>();
      if (p.contains("work_dir")) cfg.work_dir = p["work_dir"].get<std::string>();
    }
    if (j.contains("standardize")) {
      const auto& s = j["standardize"];
      reject_unknown(s, {"seconds", "rate"}, "standardize");
      if (s.contains("seconds")) cfg.standardize_seconds = s["seconds"].get<double>();
      if (s.contains("rate")) cfg.standardize_rate = s["rate"].get<int>();
    }
    if (j.contains("mel")) {
      const auto& m = j["mel"];
      reject_unknown(m, {"n_fft", "hop", "n_mels"}, "mel");
      if (m.contains("n_fft")) cfg.mel.n_fft = m["n_fft"].get<int>();
      if (m.contains("hop")) cfg.mel.hop = m["hop"].get<int>();
      if (m.contains("n_mels")) cfg.mel.n_mels = m["n_mels"].get<int>();
    }
    if (j.contains("artifact")) {
      const auto& a = j["artifact"];
      reject_unknown(a, {"kind", "band", "noise_alpha", "segment_min_s", "segment_max_s", "seed"},
                     "artifact");
      if (a.contains("kind")) cfg.artifact.kind = artifact_kind_from_name(a["kind"].get<std::string>());
      if (a.contains("band")) {
        const auto& b = a["band"];
        if (!b.is_array() || b.size() != 2) {
          throw ValidationError("config: artifact.band must be [start_hz, end_hz]");
        }
        cfg.artifact.band = BandSpec{b[0].get<double>(), b[1].get<double>()};
      }
      if (a.contains("noise_alpha")) cfg.artifact.noise_alpha = a["noise_alpha"].get<double>();
      if (a.contains("segment_min_s")) cfg.artifact.segment_min_s = a["segment_min_s"].get<double>();
      if (a.contains("segment_max_s")) cfg.artifact.segment_max_s = a["segment_max_s"].get<double>();
      if (a.contains("seed")) {
        cfg.artifact.seed = a["seed"].get<std::uint64_t>();
        artifact_seed_set = true;
      }
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      reject_unknown(t,
                     {"epochs", "lr0", "decay_factor", "decay_every", "l2", "dropout", "batch",
                      "momentum", "seed"},
                     "train");
      if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<int>();
      if (t.contains("lr0")) cfg.train.lr0 = t["lr0"].get<double>();
      if (t.contains("decay_factor")) cfg.train.decay_factor = t["decay_factor"].get<double>();
      if (t.contains("decay_every")) cfg.train.decay_every = t["decay_every"].get<int>();
      if (t.contains("l2")) cfg.train.l2 = t["l2"].get<double>();
      if (t.contains("dropout")) cfg.train.dropout_p = t["dropout"].get<double>();
      if (t.contains("batch")) cfg.train.batch = t["batch"].get<int>();
      if (t.contains("momentum")) cfg.train.momentum = t["momentum"].get<double>();
      if (t.contains("seed")) {
        cfg.train.seed = t["seed"].get<std::uint64_t>();
        train_seed_set = true;
      }
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
  } catch (const json::exception& e) {
    throw ValidationError("config: " + path.string() + ": " + e.what());
  }

  if (!artifact_seed_set) cfg.artifact.seed = cfg.seed;
  if (!train_seed_set) cfg.train.seed = cfg.seed;
  return cfg;
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* v = std::getenv("SPOOFKIT_SEED")) {
    try {
      cfg.seed = std::stoull(v);
      cfg.artifact.seed = cfg.seed;
      cfg.train.seed = cfg.seed;
    } catch (const std::exception&) {
      throw ValidationError("SPOOFKIT_SEED: not an integer");
    }
  }
  if (const char* v = std::getenv("SPOOFKIT_JOBS")) {
    try {
      cfg.jobs = std::stoi(v);
    } catch (const std::exception&) {
      throw ValidationError("SPOOFKIT_JOBS: not an integer");
    }
  }
  if (const char* v = std::getenv("SPOOFKIT_WORK_DIR")) {
    cfg.work_dir = v;
  }
}

}  // namespace spoofkit
