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

#ifndef SPOOFKIT_AUDIO_IO_HPP_
#define SPOOFKIT_AUDIO_IO_HPP_

#include <filesystem>
#include <vector>

namespace spoofkit {

// Mono waveform. Samples are dimensionless amplitudes, nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  double seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file. Accepts PCM 16-bit and IEEE float 32-bit, 1 or 2
// channels; stereo is averaged to mono. 16-bit samples are scaled by 1/32768.
// Throws MissingInputError / FormatError / ParseError.
Waveform load_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono, little-endian, at w.sample_rate. Samples outside
// [-1, 1] are clamped with a warning on stderr. Quantization is
// round(x * 32768) clamped to int16, so a read-back differs from the source
// by at most 1/32768 per sample.
void write_wav(const Waveform& w, const std::filesystem::path& path);

// Band-limited sinc resampling (Hann-windowed, 32 taps per side,
// linear-phase, per-output kernel renormalization). Returns the input
// unchanged when rates already match.
Waveform resample(const Waveform& w, int target_rate);

// Resamples to target_rate, then truncates or zero-pads the tail so the
// result has exactly round(target_seconds * target_rate) samples.
// Idempotent: a second application is a bit-exact no-op.
Waveform standardize(const Waveform& w, double target_seconds = 3.0, int target_rate = 16000);

// Scales so that max|sample| == 1. All-zero input is returned unchanged.
Waveform peak_normalize(const Waveform& w);

}  // namespace spoofkit

#endif  // SPOOFKIT_AUDIO_IO_HPP_
