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

#include "spoofkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "spoofkit/errors.hpp"
#include "spoofkit/rng.hpp"

namespace spoofkit {

const char* label_name(Label l) {
  switch (l) {
    case Label::real: return "real";
    case Label::fake: return "fake";
    case Label::artifact: return "artifact";
  }
  return "?";
}

Label label_from_name(const std::string& name) {
  if (name == "real") return Label::real;
  if (name == "fake") return Label::fake;
  if (name == "artifact") return Label::artifact;
  throw ValidationError("unknown label '" + name + "' (expected real|fake|artifact)");
}

Manifest parse_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("parse_manifest: no such file: " + path.string());
  }
  std::ifstream f(path);
  if (!f) throw IoError("parse_manifest: cannot open " + path.string());

  Manifest m;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4) {
      throw ParseError("parse_manifest: " + path.string() + ":" + std::to_string(lineno) +
                       ": expected 4 tab-separated columns, got " + std::to_string(cols.size()));
    }
    SampleRecord rec;
    rec.file_id = cols[0];
    rec.path = cols[1];
    rec.speaker_id = cols[2];
    try {
      rec.label = label_from_name(cols[3]);
    } catch (const ValidationError& e) {
      throw ValidationError("parse_manifest: " + path.string() + ":" + std::to_string(lineno) +
                            ": " + e.what());
    }
    if (rec.file_id.empty()) {
      throw ValidationError("parse_manifest: " + path.string() + ":" + std::to_string(lineno) +
                            ": empty file_id");
    }
    if (!seen.insert(rec.file_id).second) {
      throw ValidationError("parse_manifest: duplicate file_id '" + rec.file_id + "' in " +
                            path.string());
    }
    m.records.push_back(std::move(rec));
  }
  return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("write_manifest: cannot open for writing: " + path.string());
  for (const auto& r : m.records) {
    f << r.file_id << '\t' << r.path.string() << '\t' << r.speaker_id << '\t'
      << label_name(r.label) << '\n';
  }
  if (!f) throw IoError("write_manifest: write failed: " + path.string());
}

Manifest import_asvspoof_protocol(const std::filesystem::path& protocol,
                                  const std::filesystem::path& audio_root,
                                  const std::string& ext) {
  if (!std::filesystem::exists(protocol)) {
    throw MissingInputError("import_asvspoof_protocol: no such file: " + protocol.string());
  }
  std::ifstream f(protocol);
  if (!f) throw IoError("import_asvspoof_protocol: cannot open " + protocol.string());

  Manifest m;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string tok;
    while (ss >> tok) fields.push_back(tok);
    if (fields.empty()) continue;
    if (fields.size() != 5) {
      throw ParseError("import_asvspoof_protocol: " + protocol.string() + ":" +
                       std::to_string(lineno) + ": expected 5 fields, got " +
                       std::to_string(fields.size()));
    }
    SampleRecord rec;
    rec.speaker_id = fields[0];
    rec.file_id = fields[1];
    rec.path = audio_root / (fields[1] + ext);
    if (fields[4] == "bonafide") {
      rec.label = Label::real;
    } else if (fields[4] == "spoof") {
      rec.label = Label::fake;
    } else {
      throw ParseError("import_asvspoof_protocol: " + protocol.string() + ":" +
                       std::to_string(lineno) + ": unknown key '" + fields[4] + "'");
    }
    if (!seen.insert(rec.file_id).second) {
      throw ValidationError("import_asvspoof_protocol: duplicate file name '" + rec.file_id +
                            "' in " + protocol.string());
    }
    m.records.push_back(std::move(rec));
  }
  return m;
}

std::array<Manifest, 3> split_random(const Manifest& m, const std::array<double, 3>& fractions,
                                     std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ValidationError("split_random: negative fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("split_random: fractions must sum to 1");
  }
  if (m.records.size() < 3) {
    throw ValidationError("split_random: need at least as many records as splits");
  }

  // Group record indices per label, in manifest order.
  std::map<Label, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    by_label[m.records[i].label].push_back(i);
  }

  Rng rng(seed);
  std::array<std::vector<std::size_t>, 3> chosen;
  for (auto& [label, idx] : by_label) {
    // Fisher-Yates with the portable generator.
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_int(i);
      std::swap(idx[i - 1], idx[j]);
    }
    // Largest-remainder allocation keeps each split within one record of the
    // ideal per-label count.
    const auto g = idx.size();
    std::array<std::size_t, 3> take{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      const double ideal = fractions[static_cast<std::size_t>(s)] * static_cast<double>(g);
      take[static_cast<std::size_t>(s)] = static_cast<std::size_t>(std::floor(ideal));
      remainder[static_cast<std::size_t>(s)] = ideal - std::floor(ideal);
      assigned += take[static_cast<std::size_t>(s)];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainder[static_cast<std::size_t>(a)] >
                                                remainder[static_cast<std::size_t>(b)]; });
    for (std::size_t k = 0; assigned < g; ++k, ++assigned) {
      ++take[static_cast<std::size_t>(order[k % 3])];
    }
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < take[static_cast<std::size_t>(s)]; ++k) {
        chosen[static_cast<std::size_t>(s)].push_back(idx[pos++]);
      }
    }
  }

  std::array<Manifest, 3> out;
  for (int s = 0; s < 3; ++s) {
    auto& list = chosen[static_cast<std::size_t>(s)];
    std::sort(list.begin(), list.end());  // keep manifest order within each split
    for (std::size_t i : list) out[static_cast<std::size_t>(s)].records.push_back(m.records[i]);
  }
  return out;
}

std::map<std::string, SpeakerGroup> speaker_pairs(const Manifest& m) {
  std::map<std::string, SpeakerGroup> out;
  for (const auto& r : m.records) {
    auto& g = out[r.speaker_id];
    switch (r.label) {
      case Label::real: g.reals.push_back(r); break;
      case Label::fake: g.fakes.push_back(r); break;
      case Label::artifact: g.artifacts.push_back(r); break;
    }
  }
  return out;
}

TaskView build_task_view(const std::vector<const Manifest*>& manifests, Task task,
                         const std::filesystem::path& features_dir) {
  TaskView view;
  std::vector<std::string> missing;
  std::size_t n_pos = 0, n_neg = 0;

  for (const Manifest* m : manifests) {
    for (const auto& r : m->records) {
      int label;
      if (task == Task::main) {
        if (r.label == Label::real) label = 1;
        else if (r.label == Label::fake) label = 0;
        else continue;
      } else {
        if (r.label == Label::artifact) label = 1;
        else if (r.label == Label::fake) label = 0;
        else continue;
      }
      const auto feature_path = features_dir / (r.file_id + ".melf");
      if (!std::filesystem::exists(feature_path)) {
        missing.push_back(r.file_id);
        continue;
      }
      LabeledExample ex;
      ex.file_id = r.file_id;
      ex.label = label;
      ex.features = read_melf(feature_path);
      view.push_back(std::move(ex));
      (label == 1 ? n_pos : n_neg) += 1;
    }
  }

  if (!missing.empty()) {
    std::string ids;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
      if (i) ids += ", ";
      ids += missing[i];
    }
    if (missing.size() > 10) ids += ", ...";
    throw MissingInputError("build_task_view: missing feature files for " +
                            std::to_string(missing.size()) + " record(s): " + ids);
  }
  const char* pos_name = task == Task::main ? "real" : "artifact";
  if (n_pos == 0) {
    throw ValidationError(std::string("build_task_view: no '") + pos_name + "' records in view");
  }
  if (n_neg == 0) {
    throw ValidationError("build_task_view: no 'fake' records in view");
  }
  return view;
}

}  // namespace spoofkit
