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

#ifndef SPOOFKIT_ARTIFACT_GEN_HPP_
#define SPOOFKIT_ARTIFACT_GEN_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spoofkit/audio_io.hpp"
#include "spoofkit/dataset.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/spectral.hpp"

namespace spoofkit {

// Half-open frequency band [f_start, f_end), Hz.
struct BandSpec {
  double f_start = 0.0;
  double f_end = 0.0;
};

enum class ArtifactKind { fixed_freq, time_segment, dynamic_freq, background_noise };

const char* artifact_kind_name(ArtifactKind k);
ArtifactKind artifact_kind_from_name(const std::string& name);  // throws ValidationError

// Preset bands covering the second and third formant region.
inline constexpr BandSpec kFormantBandNarrow{2000.0, 2500.0};
inline constexpr BandSpec kFormantBandWide{2000.0, 3500.0};

struct ArtifactConfig {
  ArtifactKind kind = ArtifactKind::dynamic_freq;
  std::optional<BandSpec> band;  // required for fixed_freq
  double noise_alpha = 0.2;
  double segment_min_s = 0.3;
  double segment_max_s = 1.0;
  std::uint64_t seed = 0;
};

// Replaces donor bins into the base spectrum over [start_index, end_index)
// derived from the band with ceiling semantics; every other bin is copied
// bit-exact. Pure spectrum-domain step shared by both frequency swaps.
Spectrum swap_band(const Spectrum& base, const Spectrum& donor, const BandSpec& band);

// Frequency band replacement: both clips to the spectrum domain, donor bins
// from `real` over the band, inverse transform, peak normalization.
Waveform fixed_freq_swap(const Waveform& fake, const Waveform& real, const BandSpec& band);

struct TimeSegment {
  double t_start = 0.0;  // seconds
  double t_end = 0.0;
};

// Replaces a random segment of `fake` with the same-position samples from
// `real`. Duration is uniform in [min_s, max_s], start uniform over the
// feasible range. Samples outside the segment are returned bit-exact; no
// re-normalization happens so that guarantee holds.
std::pair<Waveform, TimeSegment> time_segment_swap(const Waveform& fake, const Waveform& real,
                                                   Rng& rng, double min_s = 0.3,
                                                   double max_s = 1.0);

// Band swap at a random position: start ~ U(200 Hz, 0.7 * Nyquist), width
// ~ U(100 Hz, 500 Hz), end capped at Nyquist. Returns the chosen band.
std::pair<Waveform, BandSpec> dynamic_freq_swap(const Waveform& fake, const Waveform& real,
                                                Rng& rng);

// fake + alpha * real, then peak normalization. 0 < alpha < 1.
Waveform background_noise_mix(const Waveform& fake, const Waveform& real, double alpha);

// One provenance line per generated clip, serialized as JSON lines.
struct ProvenanceRecord {
  std::string fake_id;
  std::string real_id;
  ArtifactKind kind = ArtifactKind::dynamic_freq;
  std::uint64_t seed = 0;  // derived per-file seed
  std::optional<BandSpec> band;
  std::optional<TimeSegment> segment;
  std::optional<double> alpha;
};

struct GenParams {
  double standardize_seconds = 3.0;
  int standardize_rate = 16000;
  int jobs = 1;
};

struct GenResult {
  Manifest artifacts;
  std::vector<ProvenanceRecord> provenance;
  std::size_t n_generated = 0;
  std::size_t n_skipped_no_real = 0;  // fakes whose speaker has no real clip
  std::size_t n_failed = 0;           // unreadable/corrupt inputs
  std::vector<std::string> warnings;
};

// Generates one artifact clip per fake record, pairing each fake with a
// uniformly random real clip of the same speaker (with replacement). Clips
// are written as <fake_id>_<kind>.wav under out_dir together with
// provenance.jsonl. Per-file RNG streams are derived from (config.seed,
// fake_id), so results are independent of processing order and worker count.
GenResult generate_artifact_set(const Manifest& manifest, const ArtifactConfig& config,
                                const std::filesystem::path& out_dir,
                                const GenParams& params = {});

void write_provenance(const std::vector<ProvenanceRecord>& records,
                      const std::filesystem::path& path);

}  // namespace spoofkit

#endif  // SPOOFKIT_ARTIFACT_GEN_HPP_
