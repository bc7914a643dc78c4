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

#include <cmath>
#include <fstream>
#include <set>

#include <doctest.h>

#include "spoofkit/artifact_gen.hpp"
#include "spoofkit/errors.hpp"
#include "testing_util.hpp"

using namespace spoofkit;
using spoofkit::testing::TempDir;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("artifact_gen") {

TEST_CASE("self-swap reproduces the normalized input") {
  Rng rng(31);
  const Waveform x = spoofkit::testing::make_noise(rng, 48000, 16000, 0.7);
  const Waveform expect = peak_normalize(x);

  const Waveform fixed = fixed_freq_swap(x, x, kFormantBandWide);
  REQUIRE(fixed.samples.size() == expect.samples.size());
  CHECK(max_abs_diff(fixed.samples, expect.samples) < 1e-6);

  Rng op_rng(310);
  const auto [dynamic, band] = dynamic_freq_swap(x, x, op_rng);
  CHECK(max_abs_diff(dynamic.samples, expect.samples) < 1e-6);

  // Mixing a clip onto itself only rescales it, which normalization undoes.
  const Waveform mixed = background_noise_mix(x, x, 0.2);
  CHECK(max_abs_diff(mixed.samples, expect.samples) < 1e-6);
}

TEST_CASE("swap_band touches exactly the ceiling-index range") {
  Rng rng(32);
  const Waveform fake = spoofkit::testing::make_noise(rng, 48000, 16000);
  const Waveform real = spoofkit::testing::make_noise(rng, 48000, 16000);
  const Spectrum s = dft_forward(fake);
  const Spectrum b = dft_forward(real);
  const Spectrum merged = swap_band(s, b, kFormantBandNarrow);  // 2000-2500 Hz

  // indices [6000, 7500) replaced, everything else bit-exact
  for (std::size_t k = 0; k < merged.bins.size(); ++k) {
    if (k >= 6000 && k < 7500) {
      REQUIRE(merged.bins[k] == b.bins[k]);
    } else {
      REQUIRE(merged.bins[k] == s.bins[k]);
    }
  }
}

TEST_CASE("band swap carries the donor tone and keeps the base tone") {
  const Waveform fake = spoofkit::testing::make_tone(1000.0, 3.0, 16000);
  const Waveform real = spoofkit::testing::make_tone(2200.0, 3.0, 16000);
  const Waveform out = fixed_freq_swap(fake, real, kFormantBandNarrow);

  const Spectrum check = dft_forward(out);
  // 1000 Hz -> bin 3000 (outside the band), 2200 Hz -> bin 6600 (inside).
  const double a_base = std::abs(check.bins[3000]);
  const double a_donor = std::abs(check.bins[6600]);
  CHECK(a_base > 0.0);
  CHECK(a_donor > 0.0);
  CHECK(a_base == doctest::Approx(a_donor).epsilon(1e-6));

  double third = 0.0;
  for (std::size_t k = 0; k < check.bins.size(); ++k) {
    if (k == 3000 || k == 6600) continue;
    third = std::max(third, std::abs(check.bins[k]));
  }
  CHECK(third < 1e-6 * a_base);
}

TEST_CASE("band swap validates its inputs") {
  Rng rng(33);
  const Waveform a = spoofkit::testing::make_noise(rng, 48000, 16000);
  const Waveform b = spoofkit::testing::make_noise(rng, 24000, 16000);
  CHECK_THROWS_AS(fixed_freq_swap(a, b, kFormantBandWide), ValidationError);

  const Waveform c = spoofkit::testing::make_noise(rng, 48000, 16000);
  CHECK_THROWS_AS(fixed_freq_swap(a, c, BandSpec{3500.0, 2000.0}), ValidationError);
  CHECK_THROWS_AS(fixed_freq_swap(a, c, BandSpec{2000.0, 9000.0}), ValidationError);
  CHECK_THROWS_AS(fixed_freq_swap(a, c, BandSpec{0.0, 2000.0}), ValidationError);
}

TEST_CASE("time swap of a clip with itself is the identity") {
  Rng rng(34);
  const Waveform x = spoofkit::testing::make_noise(rng, 32000, 16000);
  Rng op_rng(99);
  const auto [out, seg] = time_segment_swap(x, x, op_rng, 0.3, 1.0);
  REQUIRE(out.samples.size() == x.samples.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i) REQUIRE(out.samples[i] == x.samples[i]);
  CHECK(seg.t_end > seg.t_start);
}

TEST_CASE("time swap is piecewise: donor inside, base outside, bit-exact") {
  Waveform fake;
  fake.sample_rate = 16000;
  fake.samples.assign(48000, 0.0);
  Waveform real;
  real.sample_rate = 16000;
  real.samples.assign(48000, 1.0);

  Rng op_rng(41);
  const auto [out, seg] = time_segment_swap(fake, real, op_rng, 0.5, 0.5);
  const auto i0 = static_cast<std::size_t>(std::llround(seg.t_start * 16000));
  const auto i1 = static_cast<std::size_t>(std::llround(seg.t_end * 16000));
  REQUIRE(i1 - i0 == 8000);  // exactly 0.5 s
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (i >= i0 && i < i1) {
      REQUIRE(out.samples[i] == 1.0);
    } else {
      REQUIRE(out.samples[i] == 0.0);
    }
  }
}

TEST_CASE("time swap durations stay inside the configured range") {
  // Short clips keep 10k draws cheap; the draw logic is length-independent.
  Rng rng(35);
  const Waveform fake = spoofkit::testing::make_noise(rng, 2000, 1000);  // 2 s at 1 kHz
  const Waveform real = spoofkit::testing::make_noise(rng, 2000, 1000);
  Rng op_rng(77);
  const double tol = 1.0 / 1000.0;
  for (int i = 0; i < 10000; ++i) {
    const auto [out, seg] = time_segment_swap(fake, real, op_rng, 0.3, 1.0);
    const double dur = seg.t_end - seg.t_start;
    REQUIRE(dur >= 0.3 - tol);
    REQUIRE(dur <= 1.0 + tol);
    REQUIRE(seg.t_start >= 0.0);
    REQUIRE(seg.t_end <= 2.0 + tol);
  }
}

TEST_CASE("time swap rejects a range longer than the clip") {
  Rng rng(36);
  const Waveform fake = spoofkit::testing::make_noise(rng, 8000, 16000);  // 0.5 s
  const Waveform real = spoofkit::testing::make_noise(rng, 8000, 16000);
  Rng op_rng(1);
  CHECK_THROWS_AS(time_segment_swap(fake, real, op_rng, 0.3, 1.0), ValidationError);
}

TEST_CASE("dynamic swap draws bands inside the documented limits") {
  // At 16 kHz: Nyquist 8000, start cap 0.7 * 8000 = 5600.
  Rng rng(37);
  const Waveform fake = spoofkit::testing::make_noise(rng, 256, 16000);
  const Waveform real = spoofkit::testing::make_noise(rng, 256, 16000);
  Rng op_rng(5);
  double sum_start = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto [out, band] = dynamic_freq_swap(fake, real, op_rng);
    REQUIRE(band.f_start >= 200.0);
    REQUIRE(band.f_start <= 5600.0);
    const double width = band.f_end - band.f_start;
    REQUIRE(band.f_end <= 8000.0);
    REQUIRE(width <= 500.0);
    // width shrinks below 100 only when clipped by Nyquist
    if (band.f_end < 8000.0) REQUIRE(width >= 100.0);
    sum_start += band.f_start;
  }
  const double mean_start = sum_start / n;
  CHECK(std::abs(mean_start - 2900.0) / 2900.0 < 0.02);
}

TEST_CASE("noise mix normalizes and honors alpha") {
  Rng rng(38);

  SUBCASE("silent base reduces to the normalized donor") {
    Waveform fake;
    fake.sample_rate = 16000;
    fake.samples.assign(16000, 0.0);
    const Waveform real = spoofkit::testing::make_noise(rng, 16000, 16000, 0.4);
    const Waveform out = background_noise_mix(fake, real, 0.2);
    const Waveform expect = peak_normalize(real);
    CHECK(max_abs_diff(out.samples, expect.samples) < 1e-12);
  }

  SUBCASE("exact cancellation degenerates to silence") {
    const Waveform real = spoofkit::testing::make_noise(rng, 16000, 16000, 0.4);
    Waveform fake;
    fake.sample_rate = 16000;
    fake.samples.resize(real.samples.size());
    for (std::size_t i = 0; i < real.samples.size(); ++i) fake.samples[i] = -0.2 * real.samples[i];
    const Waveform out = background_noise_mix(fake, real, 0.2);
    for (double x : out.samples) REQUIRE(std::abs(x) < 1e-15);
  }

  SUBCASE("nonzero mixes peak at exactly one") {
    const Waveform fake = spoofkit::testing::make_noise(rng, 16000, 16000, 0.5);
    const Waveform real = spoofkit::testing::make_noise(rng, 16000, 16000, 0.5);
    const Waveform out = background_noise_mix(fake, real, 0.2);
    double peak = 0.0;
    for (double x : out.samples) peak = std::max(peak, std::abs(x));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("alpha outside (0,1) is rejected") {
    const Waveform fake = spoofkit::testing::make_noise(rng, 1000, 16000);
    const Waveform real = spoofkit::testing::make_noise(rng, 1000, 16000);
    CHECK_THROWS_AS(background_noise_mix(fake, real, 0.0), ValidationError);
    CHECK_THROWS_AS(background_noise_mix(fake, real, 1.0), ValidationError);
  }

  SUBCASE("config default is 0.2") {
    CHECK(ArtifactConfig{}.noise_alpha == 0.2);
  }
}

TEST_CASE("generate_artifact_set pairs, skips, and reproduces deterministically") {
  TempDir dir("gen");
  Rng rng(39);

  // Corpus: speaker S1 with 3 fakes + 2 reals, speaker S2 with 1 fake and
  // no real (must be skipped with a warning).
  Manifest manifest;
  auto add_clip = [&](const std::string& id, const std::string& speaker, Label label) {
    const Waveform w = spoofkit::testing::make_noise(rng, 8000, 16000, 0.5);  // 0.5 s
    const auto p = dir / (id + ".wav");
    write_wav(w, p);
    manifest.records.push_back(SampleRecord{id, p, speaker, label});
  };
  add_clip("f1", "S1", Label::fake);
  add_clip("f2", "S1", Label::fake);
  add_clip("f3", "S1", Label::fake);
  add_clip("r1", "S1", Label::real);
  add_clip("r2", "S1", Label::real);
  add_clip("f4", "S2", Label::fake);

  ArtifactConfig config;
  config.kind = ArtifactKind::time_segment;
  config.seed = 1234;

  const auto out_a = dir / "out_a";
  const GenResult a = generate_artifact_set(manifest, config, out_a);
  CHECK(a.n_generated == 3);
  CHECK(a.n_skipped_no_real == 1);
  CHECK(a.n_failed == 0);
  REQUIRE(a.artifacts.records.size() == 3);
  REQUIRE(a.provenance.size() == 3);
  CHECK(a.warnings.size() == 1);

  std::set<std::string> real_ids{"r1", "r2"};
  for (const auto& prov : a.provenance) {
    CHECK(real_ids.count(prov.real_id) == 1);
    CHECK(prov.segment.has_value());
  }
  for (const auto& rec : a.artifacts.records) {
    CHECK(rec.label == Label::artifact);
    CHECK(rec.speaker_id == "S1");
    CHECK(std::filesystem::exists(rec.path));
  }
  CHECK(std::filesystem::exists(out_a / "provenance.jsonl"));

  // Same seed, fresh directory: bit-identical clips.
  const auto out_b = dir / "out_b";
  const GenResult b = generate_artifact_set(manifest, config, out_b);
  REQUIRE(b.artifacts.records.size() == a.artifacts.records.size());
  for (std::size_t i = 0; i < a.artifacts.records.size(); ++i) {
    const auto bytes_a = spoofkit::testing::read_file_bytes(a.artifacts.records[i].path);
    const auto bytes_b = spoofkit::testing::read_file_bytes(b.artifacts.records[i].path);
    REQUIRE(bytes_a == bytes_b);
  }

  // A different seed must change at least one clip.
  ArtifactConfig other = config;
  other.seed = 999;
  const auto out_c = dir / "out_c";
  const GenResult c = generate_artifact_set(manifest, other, out_c);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.artifacts.records.size(); ++i) {
    if (spoofkit::testing::read_file_bytes(a.artifacts.records[i].path) !=
        spoofkit::testing::read_file_bytes(c.artifacts.records[i].path)) {
      any_diff = true;
    }
  }
  CHECK(any_diff);
}

TEST_CASE("every generator preserves length and rate") {
  Rng rng(46);
  const Waveform fake = spoofkit::testing::make_noise(rng, 4096, 16000, 0.6);
  const Waveform real = spoofkit::testing::make_noise(rng, 4096, 16000, 0.6);
  Rng op_rng(460);

  const Waveform a = fixed_freq_swap(fake, real, kFormantBandNarrow);
  const auto [b, seg] = time_segment_swap(fake, real, op_rng, 0.05, 0.1);
  const auto [c, band] = dynamic_freq_swap(fake, real, op_rng);
  const Waveform d = background_noise_mix(fake, real, 0.2);
  for (const Waveform* out : {&a, &b, &c, &d}) {
    CHECK(out->samples.size() == fake.samples.size());
    CHECK(out->sample_rate == fake.sample_rate);
  }
}

TEST_CASE("generate_artifact_set is order-independent across worker counts") {
  TempDir dir("gen");
  Rng rng(44);
  Manifest manifest;
  for (int spk = 0; spk < 2; ++spk) {
    for (int i = 0; i < 3; ++i) {
      for (int is_fake = 0; is_fake < 2; ++is_fake) {
        const std::string id = (is_fake ? "f" : "r") + std::to_string(spk) + std::to_string(i);
        write_wav(spoofkit::testing::make_noise(rng, 4000, 8000, 0.5), dir / (id + ".wav"));
        manifest.records.push_back(SampleRecord{id, dir / (id + ".wav"),
                                                "S" + std::to_string(spk),
                                                is_fake ? Label::fake : Label::real});
      }
    }
  }
  ArtifactConfig config;
  config.kind = ArtifactKind::time_segment;
  config.seed = 321;
  config.segment_min_s = 0.1;
  config.segment_max_s = 0.3;
  GenParams serial;
  serial.standardize_seconds = 0.5;
  serial.standardize_rate = 8000;
  GenParams parallel = serial;
  parallel.jobs = 3;

  const GenResult a = generate_artifact_set(manifest, config, dir / "serial", serial);
  const GenResult b = generate_artifact_set(manifest, config, dir / "parallel", parallel);
  REQUIRE(a.artifacts.records.size() == b.artifacts.records.size());
  for (std::size_t i = 0; i < a.artifacts.records.size(); ++i) {
    CHECK(a.artifacts.records[i].file_id == b.artifacts.records[i].file_id);
    CHECK(spoofkit::testing::read_file_bytes(a.artifacts.records[i].path) ==
          spoofkit::testing::read_file_bytes(b.artifacts.records[i].path));
  }
  CHECK(spoofkit::testing::read_file_bytes(dir / "serial" / "provenance.jsonl") ==
        spoofkit::testing::read_file_bytes(dir / "parallel" / "provenance.jsonl"));
}

TEST_CASE("generate_artifact_set reports unreadable clips and keeps going") {
  TempDir dir("gen");
  Rng rng(45);
  Manifest manifest;
  write_wav(spoofkit::testing::make_noise(rng, 4000, 8000, 0.5), dir / "r.wav");
  write_wav(spoofkit::testing::make_noise(rng, 4000, 8000, 0.5), dir / "f_ok.wav");
  {
    std::ofstream junk(dir / "f_bad.wav", std::ios::binary);
    junk << "this is not audio";
  }
  manifest.records.push_back(SampleRecord{"r", dir / "r.wav", "S", Label::real});
  manifest.records.push_back(SampleRecord{"f_ok", dir / "f_ok.wav", "S", Label::fake});
  manifest.records.push_back(SampleRecord{"f_bad", dir / "f_bad.wav", "S", Label::fake});

  ArtifactConfig config;
  config.kind = ArtifactKind::background_noise;
  GenParams params;
  params.standardize_seconds = 0.5;
  params.standardize_rate = 8000;
  const GenResult r = generate_artifact_set(manifest, config, dir / "out", params);
  CHECK(r.n_generated == 1);
  CHECK(r.n_failed == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("f_bad") != std::string::npos);
}

TEST_CASE("generate_artifact_set records alpha in provenance for noise mixes") {
  TempDir dir("gen");
  Rng rng(40);
  Manifest manifest;
  for (int i = 0; i < 2; ++i) {
    const std::string id = (i == 0 ? "fk" : "rl");
    const Waveform w = spoofkit::testing::make_noise(rng, 8000, 16000, 0.5);
    write_wav(w, dir / (id + ".wav"));
    manifest.records.push_back(
        SampleRecord{id, dir / (id + ".wav"), "S", i == 0 ? Label::fake : Label::real});
  }
  ArtifactConfig config;
  config.kind = ArtifactKind::background_noise;
  const GenResult r = generate_artifact_set(manifest, config, dir / "out");
  REQUIRE(r.provenance.size() == 1);
  REQUIRE(r.provenance[0].alpha.has_value());
  CHECK(*r.provenance[0].alpha == 0.2);

  std::ifstream f(dir / "out" / "provenance.jsonl");
  std::string line;
  REQUIRE(std::getline(f, line));
  CHECK(line.find("\"alpha\":0.2") != std::string::npos);
}

TEST_CASE("fixed_freq generation requires a band") {
  Manifest manifest;
  ArtifactConfig config;
  config.kind = ArtifactKind::fixed_freq;
  TempDir dir("gen");
  CHECK_THROWS_AS(generate_artifact_set(manifest, config, dir / "out"), ValidationError);
}

}  // TEST_SUITE
