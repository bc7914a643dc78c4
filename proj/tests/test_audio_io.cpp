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
#include <cstring>
#include <fstream>

#include <doctest.h>

#include "spoofkit/audio_io.hpp"
#include "spoofkit/errors.hpp"
#include "testing_util.hpp"

using namespace spoofkit;
using spoofkit::testing::TempDir;

namespace {

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Hand-rolled writer so load_wav is tested against independently built bytes.
void write_raw_wav(const std::filesystem::path& path, std::uint16_t format, std::uint16_t channels,
                   std::uint32_t rate, std::uint16_t bits, const std::string& payload) {
  std::string s;
  s.append("RIFF");
  put_u32(s, static_cast<std::uint32_t>(36 + payload.size()));
  s.append("WAVE");
  s.append("fmt ");
  put_u32(s, 16);
  put_u16(s, format);
  put_u16(s, channels);
  put_u32(s, rate);
  put_u32(s, rate * channels * bits / 8);
  put_u16(s, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(s, bits);
  s.append("data");
  put_u32(s, static_cast<std::uint32_t>(payload.size()));
  s.append(payload);
  std::ofstream f(path, std::ios::binary);
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string pcm16_payload(const std::vector<std::int16_t>& samples) {
  std::string p;
  for (std::int16_t v : samples) put_u16(p, static_cast<std::uint16_t>(v));
  return p;
}

std::string f32_payload(const std::vector<float>& samples) {
  std::string p;
  for (float v : samples) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(p, bits);
  }
  return p;
}

}  // namespace

TEST_SUITE("audio_io") {

TEST_CASE("load_wav scales 16-bit PCM by 1/32768") {
  TempDir dir("wav");
  write_raw_wav(dir / "a.wav", 1, 1, 16000, 16, pcm16_payload({16384, -16384, 0, 32767}));
  const Waveform w = load_wav(dir / "a.wav");
  REQUIRE(w.samples.size() == 4);
  CHECK(w.sample_rate == 16000);
  CHECK(w.samples[0] == 0.5);
  CHECK(w.samples[1] == -0.5);
  CHECK(w.samples[2] == 0.0);
  CHECK(w.samples[3] == doctest::Approx(32767.0 / 32768.0));
}

TEST_CASE("load_wav averages stereo to mono") {
  TempDir dir("wav");
  write_raw_wav(dir / "st.wav", 3, 2, 8000, 32, f32_payload({0.2f, 0.4f, -0.5f, 0.5f}));
  const Waveform w = load_wav(dir / "st.wav");
  REQUIRE(w.samples.size() == 2);
  CHECK(w.samples[0] == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(w.samples[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("load_wav rejects unsupported codecs") {
  TempDir dir("wav");
  // mu-law is format 7
  write_raw_wav(dir / "ulaw.wav", 7, 1, 8000, 8, std::string(16, '\0'));
  CHECK_THROWS_AS(load_wav(dir / "ulaw.wav"), FormatError);

  write_raw_wav(dir / "pcm24.wav", 1, 1, 8000, 24, std::string(12, '\0'));
  CHECK_THROWS_AS(load_wav(dir / "pcm24.wav"), FormatError);

  write_raw_wav(dir / "many.wav", 1, 4, 8000, 16, std::string(16, '\0'));
  CHECK_THROWS_AS(load_wav(dir / "many.wav"), FormatError);
}

TEST_CASE("load_wav error taxonomy") {
  TempDir dir("wav");
  CHECK_THROWS_AS(load_wav(dir / "absent.wav"), MissingInputError);

  {
    std::ofstream f(dir / "junk.wav", std::ios::binary);
    f << "definitely not a wav";
  }
  CHECK_THROWS_AS(load_wav(dir / "junk.wav"), FormatError);

  // data chunk claims more bytes than the file has
  std::string payload = pcm16_payload({1, 2, 3});
  write_raw_wav(dir / "trunc.wav", 1, 1, 8000, 16, payload);
  auto bytes = spoofkit::testing::read_file_bytes(dir / "trunc.wav");
  bytes.resize(bytes.size() - 2);
  {
    std::ofstream f(dir / "trunc.wav", std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(load_wav(dir / "trunc.wav"), ParseError);
}

TEST_CASE("write_wav quantization endpoints") {
  TempDir dir("wav");
  Waveform w;
  w.sample_rate = 16000;
  w.samples = {1.0, 0.0, -1.0, 0.5};
  write_wav(w, dir / "q.wav");

  const auto bytes = spoofkit::testing::read_file_bytes(dir / "q.wav");
  REQUIRE(bytes.size() == 44 + 8);
  auto sample_at = [&](int i) {
    return static_cast<std::int16_t>(bytes[44 + 2 * i] | (bytes[45 + 2 * i] << 8));
  };
  CHECK(sample_at(0) == 32767);  // clamped from 32768
  CHECK(sample_at(1) == 0);
  CHECK(sample_at(2) == -32768);
  CHECK(sample_at(3) == 16384);
}

TEST_CASE("wav round trip stays within one quantization step") {
  TempDir dir("wav");
  Rng rng(11);
  const Waveform w = spoofkit::testing::make_noise(rng, 4096, 22050);
  write_wav(w, dir / "rt.wav");
  const Waveform r = load_wav(dir / "rt.wav");
  REQUIRE(r.samples.size() == w.samples.size());
  CHECK(r.sample_rate == 22050);
  double max_err = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    max_err = std::max(max_err, std::abs(r.samples[i] - w.samples[i]));
  }
  CHECK(max_err <= 1.0 / 32768.0);
}

TEST_CASE("standardize pads the tail with zeros") {
  Rng rng(3);
  const Waveform w = spoofkit::testing::make_noise(rng, 32000, 16000);  // 2 s
  const Waveform s = standardize(w, 3.0, 16000);
  REQUIRE(s.samples.size() == 48000);
  for (std::size_t i = 0; i < 32000; ++i) REQUIRE(s.samples[i] == w.samples[i]);
  for (std::size_t i = 32000; i < 48000; ++i) REQUIRE(s.samples[i] == 0.0);
}

TEST_CASE("standardize truncates the tail bit-exact") {
  Rng rng(4);
  const Waveform w = spoofkit::testing::make_noise(rng, 64000, 16000);  // 4 s
  const Waveform s = standardize(w, 3.0, 16000);
  REQUIRE(s.samples.size() == 48000);
  for (std::size_t i = 0; i < 48000; ++i) REQUIRE(s.samples[i] == w.samples[i]);
}

TEST_CASE("standardize resamples a DC signal to the same constant") {
  Waveform w;
  w.sample_rate = 8000;
  w.samples.assign(24000, 0.5);  // 3 s of DC
  const Waveform s = standardize(w, 3.0, 16000);
  REQUIRE(s.samples.size() == 48000);
  double max_err = 0.0;
  for (double x : s.samples) max_err = std::max(max_err, std::abs(x - 0.5));
  CHECK(max_err < 1e-3);
}

TEST_CASE("resample matches direct evaluation of the interpolation kernel") {
  // Independent oracle: the normalized Hann-windowed sinc sum evaluated
  // straight from its definition.
  Rng rng(5);
  const Waveform w = spoofkit::testing::make_noise(rng, 500, 8000);
  const Waveform r = resample(w, 12000);

  constexpr int kTaps = 32;
  constexpr double kPi = 3.14159265358979323846;
  const double ratio = 12000.0 / 8000.0;
  auto kernel = [&](double u) {
    const double fc = std::min(1.0, ratio);
    const double win = 0.5 + 0.5 * std::cos(kPi * u / kTaps);
    const double x = fc * u;
    const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(kPi * x) / (kPi * x);
    return fc * sinc * win;
  };
  for (std::size_t i = 0; i < r.samples.size(); i += 37) {
    const double center = static_cast<double>(i) / ratio;
    const auto base = static_cast<std::ptrdiff_t>(std::floor(center));
    double acc = 0.0, wsum = 0.0;
    for (std::ptrdiff_t j = base - kTaps + 1; j <= base + kTaps; ++j) {
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(w.samples.size())) continue;
      const double k = kernel(center - static_cast<double>(j));
      acc += k * w.samples[static_cast<std::size_t>(j)];
      wsum += k;
    }
    CHECK(r.samples[i] == doctest::Approx(acc / wsum).epsilon(1e-12));
  }
}

TEST_CASE("standardize is idempotent bit-exact") {
  Rng rng(6);
  const Waveform w = spoofkit::testing::make_noise(rng, 10000, 44100);
  const Waveform once = standardize(w);
  const Waveform twice = standardize(once);
  REQUIRE(once.samples.size() == twice.samples.size());
  for (std::size_t i = 0; i < once.samples.size(); ++i) {
    REQUIRE(once.samples[i] == twice.samples[i]);
  }
}

TEST_CASE("standardize rejects empty input") {
  Waveform w;
  w.sample_rate = 16000;
  CHECK_THROWS_AS(standardize(w), ValidationError);
}

TEST_CASE("peak_normalize") {
  Waveform w;
  w.sample_rate = 16000;

  SUBCASE("scales to unit peak") {
    w.samples = {0.5, -0.25};
    const Waveform n = peak_normalize(w);
    CHECK(n.samples[0] == 1.0);
    CHECK(n.samples[1] == -0.5);
  }
  SUBCASE("all zeros unchanged") {
    w.samples = {0.0, 0.0, 0.0};
    const Waveform n = peak_normalize(w);
    for (double x : n.samples) CHECK(x == 0.0);
  }
  SUBCASE("negative peak") {
    w.samples = {-2.0, 1.0};
    const Waveform n = peak_normalize(w);
    CHECK(n.samples[0] == -1.0);
    CHECK(n.samples[1] == 0.5);
  }
  SUBCASE("idempotent") {
    Rng rng(8);
    w = spoofkit::testing::make_noise(rng, 1000, 16000, 0.3);
    const Waveform once = peak_normalize(w);
    const Waveform twice = peak_normalize(once);
    for (std::size_t i = 0; i < once.samples.size(); ++i) {
      REQUIRE(twice.samples[i] == once.samples[i]);
    }
  }
}

}  // TEST_SUITE
