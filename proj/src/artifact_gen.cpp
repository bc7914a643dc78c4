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

#include "spoofkit/artifact_gen.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

using nlohmann::json;

void check_pair(const Waveform& fake, const Waveform& real, const char* op) {
  if (fake.samples.size() != real.samples.size() || fake.sample_rate != real.sample_rate) {
    throw ValidationError(std::string(op) + ": pair must share length and sample rate");
  }
  if (fake.samples.empty()) {
    throw ValidationError(std::string(op) + ": empty pair");
  }
}

void check_band(const BandSpec& band, double nyquist, const char* op) {
  if (!(band.f_start > 0.0) || !(band.f_start < band.f_end) || band.f_end > nyquist) {
    throw ValidationError(std::string(op) + ": band must satisfy 0 < start < end <= Nyquist");
  }
}

const char* kind_suffix(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::fixed_freq: return "fixedfreq";
    case ArtifactKind::time_segment: return "timeswap";
    case ArtifactKind::dynamic_freq: return "dynfreq";
    case ArtifactKind::background_noise: return "noisemix";
  }
  return "?";
}

}  // namespace

const char* artifact_kind_name(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::fixed_freq: return "fixed_freq";
    case ArtifactKind::time_segment: return "time_segment";
    case ArtifactKind::dynamic_freq: return "dynamic_freq";
    case ArtifactKind::background_noise: return "background_noise";
  }
  return "?";
}

ArtifactKind artifact_kind_from_name(const std::string& name) {
  if (name == "fixed_freq") return ArtifactKind::fixed_freq;
  if (name == "time_segment") return ArtifactKind::time_segment;
  if (name == "dynamic_freq") return ArtifactKind::dynamic_freq;
  if (name == "background_noise") return ArtifactKind::background_noise;
  throw ValidationError("unknown artifact kind '" + name + "'");
}

Spectrum swap_band(const Spectrum& base, const Spectrum& donor, const BandSpec& band) {
  if (base.n != donor.n || base.sample_rate != donor.sample_rate) {
    throw ValidationError("swap_band: spectra must share length and sample rate");
  }
  check_band(band, base.nyquist(), "swap_band");

  const std::size_t start = freq_to_index(band.f_start, base.sample_rate, base.n);
  const std::size_t end = freq_to_index(band.f_end, base.sample_rate, base.n);

  Spectrum out = base;
  const std::size_t hi = std::min(end, out.bins.size());
  for (std::size_t k = start; k < hi; ++k) out.bins[k] = donor.bins[k];
  return out;
}

Waveform fixed_freq_swap(const Waveform& fake, const Waveform& real, const BandSpec& band) {
  check_pair(fake, real, "fixed_freq_swap");
  const Spectrum s = dft_forward(fake);
  const Spectrum b = dft_forward(real);
  const Spectrum merged = swap_band(s, b, band);
  return peak_normalize(dft_inverse(merged));
}

std::pair<Waveform, TimeSegment> time_segment_swap(const Waveform& fake, const Waveform& real,
                                                   Rng& rng, double min_s, double max_s) {
  check_pair(fake, real, "time_segment_swap");
  if (!(min_s > 0.0) || !(min_s <= max_s)) {
    throw ValidationError("time_segment_swap: bad segment range");
  }
  const auto n = fake.samples.size();
  const double clip_s = static_cast<double>(n) / fake.sample_rate;
  if (max_s > clip_s) {
    throw ValidationError("time_segment_swap: segment range exceeds clip length");
  }

  const double dur_s = rng.uniform(min_s, max_s);
  auto seg_len = static_cast<std::size_t>(std::llround(dur_s * fake.sample_rate));
  seg_len = std::min(std::max<std::size_t>(seg_len, 1), n);
  const std::size_t max_start = n - seg_len;
  const std::size_t start = (max_start == 0) ? 0 : rng.uniform_int(max_start + 1);

  Waveform out = fake;
  for (std::size_t i = start; i < start + seg_len; ++i) out.samples[i] = real.samples[i];

  TimeSegment seg;
  seg.t_start = static_cast<double>(start) / fake.sample_rate;
  seg.t_end = static_cast<double>(start + seg_len) / fake.sample_rate;
  return {std::move(out), seg};
}

std::pair<Waveform, BandSpec> dynamic_freq_swap(const Waveform& fake, const Waveform& real,
                                                Rng& rng) {
  check_pair(fake, real, "dynamic_freq_swap");
  const double nyquist = fake.sample_rate / 2.0;
  const double start_hi = 0.7 * nyquist;
  if (start_hi <= 200.0) {
    throw ValidationError("dynamic_freq_swap: sample rate too low for the band model");
  }

  BandSpec band;
  band.f_start = rng.uniform(200.0, start_hi);
  const double width = rng.uniform(100.0, 500.0);
  band.f_end = std::min(band.f_start + width, nyquist);

  return {fixed_freq_swap(fake, real, band), band};
}

Waveform background_noise_mix(const Waveform& fake, const Waveform& real, double alpha) {
  check_pair(fake, real, "background_noise_mix");
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw ValidationError("background_noise_mix: alpha must be in (0, 1)");
  }
  Waveform out;
  out.sample_rate = fake.sample_rate;
  out.samples.resize(fake.samples.size());
  for (std::size_t i = 0; i < fake.samples.size(); ++i) {
    out.samples[i] = fake.samples[i] + alpha * real.samples[i];
  }
  return peak_normalize(out);
}

void write_provenance(const std::vector<ProvenanceRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("write_provenance: cannot open for writing: " + path.string());
  for (const auto& r : records) {
    json j;
    j["fake_id"] = r.fake_id;
    j["real_id"] = r.real_id;
    j["kind"] = artifact_kind_name(r.kind);
    j["seed"] = r.seed;
    if (r.band) j["band"] = {r.band->f_start, r.band->f_end};
    if (r.segment) j["segment"] = {r.segment->t_start, r.segment->t_end};
    if (r.alpha) j["alpha"] = *r.alpha;
    f << j.dump() << '\n';
  }
  if (!f) throw IoError("write_provenance: write failed: " + path.string());
}

GenResult generate_artifact_set(const Manifest& manifest, const ArtifactConfig& config,
                                const std::filesystem::path& out_dir, const GenParams& params) {
  if (config.kind == ArtifactKind::fixed_freq && !config.band) {
    throw ValidationError("generate_artifact_set: fixed_freq requires a band");
  }
  if (config.kind == ArtifactKind::time_segment &&
      config.segment_max_s > params.standardize_seconds) {
    throw ValidationError("generate_artifact_set: segment range exceeds standardized length");
  }
  std::filesystem::create_directories(out_dir);

  const auto groups = speaker_pairs(manifest);

  struct Job {
    const SampleRecord* fake = nullptr;
    const SpeakerGroup* group = nullptr;
  };
  std::vector<Job> jobs;
  GenResult result;
  for (const auto& [speaker, group] : groups) {
    if (group.fakes.empty()) continue;
    if (group.reals.empty()) {
      result.n_skipped_no_real += group.fakes.size();
      result.warnings.push_back("speaker " + speaker + " has " +
                                std::to_string(group.fakes.size()) +
                                " fake clip(s) but no real clip; skipped");
      continue;
    }
    for (const auto& fake : group.fakes) jobs.push_back(Job{&fake, &group});
  }

  struct Slot {
    bool ok = false;
    std::string error;
    SampleRecord record;
    ProvenanceRecord prov;
  };
  std::vector<Slot> slots(jobs.size());

  auto process = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    Slot& slot = slots[idx];
    const std::string& fake_id = job.fake->file_id;
    Rng rng = Rng::derive(config.seed, fake_id);
    // Stream order is fixed: real pick first, then the artifact's own draws.
    const auto& real_rec = job.group->reals[rng.uniform_int(job.group->reals.size())];
    try {
      const Waveform fake = standardize(load_wav(job.fake->path), params.standardize_seconds,
                                        params.standardize_rate);
      const Waveform real = standardize(load_wav(real_rec.path), params.standardize_seconds,
                                        params.standardize_rate);

      ProvenanceRecord prov;
      prov.fake_id = fake_id;
      prov.real_id = real_rec.file_id;
      prov.kind = config.kind;
      prov.seed = Rng::splitmix(config.seed ^ Rng::fnv1a64(fake_id));

      Waveform out;
      switch (config.kind) {
        case ArtifactKind::fixed_freq: {
          out = fixed_freq_swap(fake, real, *config.band);
          prov.band = *config.band;
          break;
        }
        case ArtifactKind::time_segment: {
          auto [w, seg] = time_segment_swap(fake, real, rng, config.segment_min_s,
                                            config.segment_max_s);
          out = std::move(w);
          prov.segment = seg;
          break;
        }
        case ArtifactKind::dynamic_freq: {
          auto [w, band] = dynamic_freq_swap(fake, real, rng);
          out = std::move(w);
          prov.band = band;
          break;
        }
        case ArtifactKind::background_noise: {
          out = background_noise_mix(fake, real, config.noise_alpha);
          prov.alpha = config.noise_alpha;
          break;
        }
      }

      SampleRecord rec;
      rec.file_id = fake_id + "_" + kind_suffix(config.kind);
      rec.path = out_dir / (rec.file_id + ".wav");
      rec.speaker_id = job.fake->speaker_id;
      rec.label = Label::artifact;
      write_wav(out, rec.path);

      slot.record = std::move(rec);
      slot.prov = std::move(prov);
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.error = fake_id + ": " + e.what();
    }
  };

  const int jobs_n = std::max(1, params.jobs);
  if (jobs_n == 1 || jobs.size() < 2) {
    for (std::size_t i = 0; i < jobs.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min<int>(jobs_n, static_cast<int>(jobs.size()));
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
          process(i);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  // Results are collected in manifest order regardless of worker scheduling.
  for (auto& slot : slots) {
    if (slot.ok) {
      result.artifacts.records.push_back(std::move(slot.record));
      result.provenance.push_back(std::move(slot.prov));
      ++result.n_generated;
    } else {
      ++result.n_failed;
      result.warnings.push_back(slot.error);
    }
  }

  for (const auto& w : result.warnings) std::cerr << "generate_artifact_set: " << w << "\n";
  write_provenance(result.provenance, out_dir / "provenance.jsonl");
  return result;
}

}  // namespace spoofkit
