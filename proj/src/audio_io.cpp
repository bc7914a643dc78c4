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

#include "spoofkit/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSincHalfTaps = 32;

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

float f32_from_bits(std::uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("load_wav: no such file: " + path.string());
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_wav: cannot open " + path.string());

  std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(raw.data());
  const std::size_t size = raw.size();

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw FormatError("load_wav: not a RIFF/WAVE file: " + path.string());
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const char* id = reinterpret_cast<const char*>(data + pos);
    const std::uint32_t chunk_len = read_u32le(data + pos + 4);
    pos += 8;
    if (pos + chunk_len > size) {
      throw ParseError("load_wav: truncated chunk '" + std::string(id, 4) + "' in " + path.string());
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw ParseError("load_wav: fmt chunk too short in " + path.string());
      format = read_u16le(data + pos);
      channels = read_u16le(data + pos + 2);
      rate = read_u32le(data + pos + 4);
      bits = read_u16le(data + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = pos;
      data_len = chunk_len;
      have_data = true;
    }
    pos += chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || !have_data) {
    throw ParseError("load_wav: missing fmt or data chunk in " + path.string());
  }
  if (channels < 1 || channels > 2) {
    throw FormatError("load_wav: unsupported channel count " + std::to_string(channels) +
                      " in " + path.string());
  }
  if (rate == 0) throw FormatError("load_wav: zero sample rate in " + path.string());

  const bool pcm16 = (format == kFormatPcm && bits == 16);
  const bool float32 = (format == kFormatIeeeFloat && bits == 32);
  if (!pcm16 && !float32) {
    throw FormatError("load_wav: unsupported codec (format=" + std::to_string(format) +
                      ", bits=" + std::to_string(bits) + ") in " + path.string());
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  if (data_len % frame_bytes != 0) {
    throw ParseError("load_wav: data size not a whole number of frames in " + path.string());
  }
  const std::size_t n_frames = data_len / frame_bytes;

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(n_frames);
  const unsigned char* p = data + data_off;
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      if (pcm16) {
        const auto v = static_cast<std::int16_t>(read_u16le(p));
        acc += static_cast<double>(v) / 32768.0;
        p += 2;
      } else {
        acc += static_cast<double>(f32_from_bits(read_u32le(p)));
        p += 4;
      }
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  if (w.sample_rate <= 0) throw ValidationError("write_wav: sample rate must be positive");

  std::size_t clamped = 0;
  std::string payload;
  payload.reserve(w.samples.size() * 2);
  for (double x : w.samples) {
    if (x > 1.0 || x < -1.0) ++clamped;
    long q = std::lround(x * 32768.0);
    q = std::clamp(q, -32768L, 32767L);
    put_u16le(payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (clamped > 0) {
    std::cerr << "write_wav: clamped " << clamped << " out-of-range sample(s) in "
              << path.string() << "\n";
  }

  std::string out;
  out.reserve(44 + payload.size());
  out.append("RIFF");
  put_u32le(out, static_cast<std::uint32_t>(36 + payload.size()));
  out.append("WAVE");
  out.append("fmt ");
  put_u32le(out, 16);
  put_u16le(out, kFormatPcm);
  put_u16le(out, 1);  // mono
  put_u32le(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32le(out, static_cast<std::uint32_t>(w.sample_rate) * 2);  // byte rate
  put_u16le(out, 2);   // block align
  put_u16le(out, 16);  // bits per sample
  out.append("data");
  put_u32le(out, static_cast<std::uint32_t>(payload.size()));
  out.append(payload);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("write_wav: cannot open for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write_wav: write failed: " + path.string());
}

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw ValidationError("resample: target rate must be positive");
  if (w.sample_rate <= 0) throw ValidationError("resample: source rate must be positive");
  if (w.sample_rate == target_rate) return w;
  if (w.samples.empty()) return Waveform{{}, target_rate};

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const double cutoff = std::min(1.0, ratio);  // anti-alias when downsampling
  const auto n_src = static_cast<std::ptrdiff_t>(w.samples.size());
  const auto n_out = static_cast<std::size_t>(std::llround(n_src * ratio));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);

  for (std::size_t i = 0; i < n_out; ++i) {
    const double center = static_cast<double>(i) / ratio;  // in source samples
    const auto base = static_cast<std::ptrdiff_t>(std::floor(center));
    double acc = 0.0;
    double wsum = 0.0;
    for (std::ptrdiff_t j = base - kSincHalfTaps + 1; j <= base + kSincHalfTaps; ++j) {
      const double u = center - static_cast<double>(j);
      const double win = 0.5 + 0.5 * std::cos(kPi * u / kSincHalfTaps);
      const double k = cutoff * sinc(cutoff * u) * win;
      if (j >= 0 && j < n_src) {
        acc += w.samples[static_cast<std::size_t>(j)] * k;
        wsum += k;
      }
    }
    // Renormalizing by the in-range kernel mass keeps DC flat at the edges.
    out.samples[i] = (std::abs(wsum) > 1e-12) ? acc / wsum : 0.0;
  }
  return out;
}

Waveform standardize(const Waveform& w, double target_seconds, int target_rate) {
  if (w.samples.empty()) throw ValidationError("standardize: empty waveform");
  if (target_seconds <= 0.0) throw ValidationError("standardize: target seconds must be positive");
  if (target_rate <= 0) throw ValidationError("standardize: target rate must be positive");

  Waveform out = resample(w, target_rate);
  const auto want = static_cast<std::size_t>(std::llround(target_seconds * target_rate));
  out.samples.resize(want, 0.0);  // truncates or zero-pads the tail
  return out;
}

Waveform peak_normalize(const Waveform& w) {
  double peak = 0.0;
  for (double x : w.samples) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return w;
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) out.samples[i] = w.samples[i] / peak;
  return out;
}

}  // namespace spoofkit
