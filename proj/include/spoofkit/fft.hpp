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

#ifndef SPOOFKIT_FFT_HPP_
#define SPOOFKIT_FFT_HPP_

#include <complex>
#include <vector>

namespace spoofkit::fft {

using Complex = std::complex<double>;

// In-place FFT for power-of-two sizes. inverse=true applies the 1/N scale.
void fft_pow2(std::vector<Complex>& a, bool inverse);

// DFT of arbitrary length, exact (no zero padding of the transform length).
// Power-of-two sizes go through the radix-2 path, everything else through
// Bluestein's chirp-z reformulation. Twiddle/chirp plans are cached per size
// behind an immutable, lock-protected table; concurrent calls are safe.
std::vector<Complex> dft(const std::vector<Complex>& x, bool inverse);

}  // namespace spoofkit::fft

#endif  // SPOOFKIT_FFT_HPP_
