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

#ifndef SPOOFKIT_SPECTRAL_HPP_
#define SPOOFKIT_SPECTRAL_HPP_

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <vector>

#include "spoofkit/audio_io.hpp"

namespace spoofkit {

// One-sided spectrum of a full clip: bins k = 0 .. n/2 (inclusive), where n
// is the original sample count. Edits to a bin implicitly apply to its
// conjugate mirror; the inverse transform reconstructs a real signal.
struct Spectrum {
  std::vector<std::complex<double>> bins;
  std::size_t n = 0;
  int sample_rate = 0;

  double nyquist() const { return sample_rate / 2.0; }
};

// Exact-length transform of the whole clip (no zero padding: the bin index
// arithmetic below assumes bin spacing sample_rate / n).
Spectrum dft_forward(const Waveform& w);

// Real reconstruction from a one-sided spectrum. Throws ValidationError if
// the imaginary residue after enforcing conjugate symmetry exceeds 1e-9
// relative to the peak, which indicates a spectrum that does not describe a
// real signal.
Waveform dft_inverse(const Spectrum& s);

// Smallest bin index k with k * sample_rate / n >= f (ceiling semantics).
// Throws ValidationError for f outside [0, sample_rate/2].
std::size_t freq_to_index(double f, int sample_rate, std::size_t n);

struct MelParams {
  int n_fft = 2048;
  int hop = 512;
  int n_mels = 128;
};

constexpr float kMelFloorDb = -80.0f;

// Mel spectrogram in decibels relative to the matrix maximum, floored at
// kMelFloorDb. Row r is mel band r (low to high), column t is frame t.
struct MelSpectrogram {
  std::vector<float> values;  // row-major [n_mels][n_frames]
  int n_mels = 0;
  int n_frames = 0;
  MelParams params;
  int sample_rate = 0;

  float at(int row, int col) const { return values[static_cast<std::size_t>(row) * n_frames + col]; }
};

// Triangular HTK-scale filterbank spanning 0 Hz to Nyquist. Instances are
// immutable and cached per (n_fft, n_mels, sample_rate).
class MelFilterbank {
 public:
  static std::shared_ptr<const MelFilterbank> get(int n_fft, int n_mels, int sample_rate);

  int n_filters() const { return n_mels_; }
  int n_bins() const { return n_fft_ / 2 + 1; }
  double weight(int filter, int bin) const;
  // Hz center of a filter's triangle peak.
  double center_hz(int filter) const { return centers_hz_[static_cast<std::size_t>(filter) + 1]; }

  // mel[m] = sum_k weight(m, k) * power[k]
  void apply(const std::vector<double>& power, std::vector<double>& mel) const;

  static double hz_to_mel(double f) ;
  static double mel_to_hz(double m);

 private:
  MelFilterbank(int n_fft, int n_mels, int sample_rate);

  int n_fft_;
  int n_mels_;
  int sample_rate_;
  std::vector<double> centers_hz_;  // n_mels + 2 triangle corner points
  std::vector<int> first_bin_;      // per filter, first bin with support
  std::vector<std::vector<double>> weights_;  // per filter, dense over support
};

// STFT -> power -> mel filterbank -> dB (max reference, floored). Requires a
// waveform of at least n_fft/2 + 1 samples; standardized clips always
// qualify. Deterministic: identical input gives bit-identical output.
MelSpectrogram mel_spectrogram(const Waveform& w, const MelParams& params = {});

// MELF container: magic "MELF", u32 version=1, u32 rows, u32 cols, then
// rows*cols little-endian f32, row-major.
void write_melf(const MelSpectrogram& m, const std::filesystem::path& path);
MelSpectrogram read_melf(const std::filesystem::path& path);

}  // namespace spoofkit

#endif  // SPOOFKIT_SPECTRAL_HPP_
