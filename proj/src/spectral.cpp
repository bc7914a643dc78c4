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

#include "spoofkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <tuple>

#include "spoofkit/errors.hpp"
#include "spoofkit/fft.hpp"

namespace spoofkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32le_at(const std::string& s, std::size_t off) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data() + off);
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

}  // namespace

Spectrum dft_forward(const Waveform& w) {
  if (w.samples.size() < 2) throw ValidationError("dft_forward: need at least 2 samples");

  const std::size_t n = w.samples.size();
  std::vector<fft::Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = fft::Complex(w.samples[i], 0.0);
  std::vector<fft::Complex> y = fft::dft(x, false);

  Spectrum s;
  s.n = n;
  s.sample_rate = w.sample_rate;
  s.bins.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n / 2 + 1));
  return s;
}

Waveform dft_inverse(const Spectrum& s) {
  const std::size_t n = s.n;
  if (n < 2) throw ValidationError("dft_inverse: spectrum length invalid");
  if (s.bins.size() != n / 2 + 1) {
    throw ValidationError("dft_inverse: bin count does not match sample count");
  }

  std::vector<fft::Complex> full(n);
  full[0] = fft::Complex(s.bins[0].real(), 0.0);
  const std::size_t half = n / 2;
  if (n % 2 == 0) full[half] = fft::Complex(s.bins[half].real(), 0.0);
  const std::size_t last_mirrored = (n % 2 == 0) ? half - 1 : half;
  for (std::size_t k = 1; k <= last_mirrored; ++k) {
    full[k] = s.bins[k];
    full[n - k] = std::conj(s.bins[k]);
  }

  std::vector<fft::Complex> t = fft::dft(full, true);

  double peak = 0.0, residue = 0.0;
  for (const auto& v : t) {
    peak = std::max(peak, std::abs(v.real()));
    residue = std::max(residue, std::abs(v.imag()));
  }
  if (residue > 1e-9 * std::max(1.0, peak)) {
    throw ValidationError("dft_inverse: imaginary residue too large for a real signal");
  }

  Waveform w;
  w.sample_rate = s.sample_rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = t[i].real();
  return w;
}

std::size_t freq_to_index(double f, int sample_rate, std::size_t n) {
  if (sample_rate <= 0 || n == 0) throw ValidationError("freq_to_index: bad arguments");
  const double nyquist = sample_rate / 2.0;
  if (f < 0.0 || f > nyquist) {
    throw ValidationError("freq_to_index: frequency outside [0, Nyquist]");
  }
  // min{ k : k * sample_rate / n >= f }
  const double exact = f * static_cast<double>(n) / sample_rate;
  return static_cast<std::size_t>(std::ceil(exact));
}

double MelFilterbank::hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

double MelFilterbank::mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int n_fft, int n_mels, int sample_rate)
    : n_fft_(n_fft), n_mels_(n_mels), sample_rate_(sample_rate) {
  if (n_fft < 4 || n_mels < 1 || sample_rate <= 0) {
    throw ValidationError("MelFilterbank: bad parameters");
  }

  const double mel_max = hz_to_mel(sample_rate / 2.0);
  centers_hz_.resize(static_cast<std::size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    centers_hz_[static_cast<std::size_t>(i)] = mel_to_hz(mel_max * i / (n_mels + 1));
  }

  const int bins = n_bins();
  const double hz_per_bin = static_cast<double>(sample_rate) / n_fft;
  first_bin_.resize(static_cast<std::size_t>(n_mels));
  weights_.resize(static_cast<std::size_t>(n_mels));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = centers_hz_[static_cast<std::size_t>(m)];
    const double mid = centers_hz_[static_cast<std::size_t>(m) + 1];
    const double hi = centers_hz_[static_cast<std::size_t>(m) + 2];
    int first = -1;
    std::vector<double> ws;
    for (int k = 0; k < bins; ++k) {
      const double f = k * hz_per_bin;
      double wgt = 0.0;
      if (f > lo && f < mid) {
        wgt = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        wgt = (hi - f) / (hi - mid);
      }
      if (wgt > 0.0) {
        if (first < 0) first = k;
        ws.push_back(wgt);
      } else if (first >= 0) {
        break;  // support is contiguous
      }
    }
    first_bin_[static_cast<std::size_t>(m)] = std::max(first, 0);
    weights_[static_cast<std::size_t>(m)] = std::move(ws);
  }
}

double MelFilterbank::weight(int filter, int bin) const {
  const auto& ws = weights_[static_cast<std::size_t>(filter)];
  const int rel = bin - first_bin_[static_cast<std::size_t>(filter)];
  if (rel < 0 || rel >= static_cast<int>(ws.size())) return 0.0;
  return ws[static_cast<std::size_t>(rel)];
}

void MelFilterbank::apply(const std::vector<double>& power, std::vector<double>& mel) const {
  mel.assign(static_cast<std::size_t>(n_mels_), 0.0);
  for (int m = 0; m < n_mels_; ++m) {
    const auto& ws = weights_[static_cast<std::size_t>(m)];
    const int first = first_bin_[static_cast<std::size_t>(m)];
    double acc = 0.0;
    for (std::size_t j = 0; j < ws.size(); ++j) {
      acc += ws[j] * power[static_cast<std::size_t>(first) + j];
    }
    mel[static_cast<std::size_t>(m)] = acc;
  }
}

std::shared_ptr<const MelFilterbank> MelFilterbank::get(int n_fft, int n_mels, int sample_rate) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const MelFilterbank>> cache;
  std::scoped_lock lock(mu);
  const auto key = std::make_tuple(n_fft, n_mels, sample_rate);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto fb = std::shared_ptr<const MelFilterbank>(new MelFilterbank(n_fft, n_mels, sample_rate));
  cache.emplace(key, fb);
  return fb;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const MelParams& params) {
  const int n_fft = params.n_fft;
  const int hop = params.hop;
  if (n_fft < 4 || hop < 1) throw ValidationError("mel_spectrogram: bad parameters");
  const auto n = static_cast<std::ptrdiff_t>(w.samples.size());
  const int pad = n_fft / 2;
  if (n < pad + 1) throw ValidationError("mel_spectrogram: clip shorter than half a window");

  const auto fb = MelFilterbank::get(n_fft, params.n_mels, w.sample_rate);
  const int n_frames = 1 + static_cast<int>(n / hop);
  const int bins = n_fft / 2 + 1;

  // Periodic Hann window.
  std::vector<double> window(static_cast<std::size_t>(n_fft));
  for (int i = 0; i < n_fft; ++i) {
    window[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n_fft);
  }

  // Centered framing with reflect padding at both ends.
  auto sample_at = [&](std::ptrdiff_t idx) {
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * n - 2 - idx;
    return w.samples[static_cast<std::size_t>(idx)];
  };

  std::vector<double> mel_power(static_cast<std::size_t>(params.n_mels) *
                                static_cast<std::size_t>(n_frames));
  std::vector<fft::Complex> frame(static_cast<std::size_t>(n_fft));
  std::vector<double> power(static_cast<std::size_t>(bins));
  std::vector<double> mel;
  for (int t = 0; t < n_frames; ++t) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t) * hop - pad;
    for (int i = 0; i < n_fft; ++i) {
      frame[static_cast<std::size_t>(i)] =
          fft::Complex(sample_at(start + i) * window[static_cast<std::size_t>(i)], 0.0);
    }
    fft::fft_pow2(frame, false);
    for (int k = 0; k < bins; ++k) {
      power[static_cast<std::size_t>(k)] = std::norm(frame[static_cast<std::size_t>(k)]);
    }
    fb->apply(power, mel);
    for (int m = 0; m < params.n_mels; ++m) {
      mel_power[static_cast<std::size_t>(m) * n_frames + t] = mel[static_cast<std::size_t>(m)];
    }
  }

  double ref = 0.0;
  for (double v : mel_power) ref = std::max(ref, v);

  MelSpectrogram out;
  out.n_mels = params.n_mels;
  out.n_frames = n_frames;
  out.params = params;
  out.sample_rate = w.sample_rate;
  out.values.resize(mel_power.size());
  for (std::size_t i = 0; i < mel_power.size(); ++i) {
    if (ref <= 0.0 || mel_power[i] <= 0.0) {
      out.values[i] = kMelFloorDb;
    } else {
      const double db = 10.0 * std::log10(mel_power[i] / ref);
      out.values[i] = static_cast<float>(std::max(db, static_cast<double>(kMelFloorDb)));
    }
  }
  return out;
}

void write_melf(const MelSpectrogram& m, const std::filesystem::path& path) {
  std::string out;
  out.reserve(16 + m.values.size() * 4);
  out.append("MELF");
  put_u32le(out, 1);
  put_u32le(out, static_cast<std::uint32_t>(m.n_mels));
  put_u32le(out, static_cast<std::uint32_t>(m.n_frames));
  for (float v : m.values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32le(out, bits);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("write_melf: cannot open for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write_melf: write failed: " + path.string());
}

MelSpectrogram read_melf(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("read_melf: no such file: " + path.string());
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("read_melf: cannot open " + path.string());
  std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (raw.size() < 16 || raw.compare(0, 4, "MELF") != 0) {
    throw FormatError("read_melf: bad magic in " + path.string());
  }
  const std::uint32_t version = read_u32le_at(raw, 4);
  if (version != 1) {
    throw FormatError("read_melf: unsupported version " + std::to_string(version));
  }
  const std::uint32_t rows = read_u32le_at(raw, 8);
  const std::uint32_t cols = read_u32le_at(raw, 12);
  const std::size_t want = 16 + static_cast<std::size_t>(rows) * cols * 4;
  if (rows == 0 || cols == 0 || raw.size() != want) {
    throw ParseError("read_melf: size mismatch in " + path.string());
  }

  MelSpectrogram m;
  m.n_mels = static_cast<int>(rows);
  m.n_frames = static_cast<int>(cols);
  m.values.resize(static_cast<std::size_t>(rows) * cols);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const std::uint32_t bits = read_u32le_at(raw, 16 + i * 4);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    m.values[i] = v;
  }
  return m;
}

}  // namespace spoofkit
