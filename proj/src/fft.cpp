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

#include "spoofkit/fft.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include "spoofkit/errors.hpp"

namespace spoofkit::fft {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Forward twiddles exp(-2*pi*i*j/n) for j < n/2, cached per size.
const std::vector<Complex>& twiddles_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<std::vector<Complex>>> cache;
  std::scoped_lock lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    auto tw = std::make_unique<std::vector<Complex>>(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
      const double a = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
      (*tw)[j] = Complex(std::cos(a), std::sin(a));
    }
    slot = std::move(tw);
  }
  return *slot;
}

// Bluestein plan for size n: chirp w[k] = exp(-i*pi*k^2/n) and the FFT of the
// conjugate chirp laid out circularly at the convolution size m.
struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Complex> chirp;     // length n
  std::vector<Complex> fft_filter;  // length m
};

std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  auto plan = std::make_shared<BluesteinPlan>();
  plan->n = n;
  plan->m = next_pow2(2 * n - 1);
  plan->chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the trig argument small, preserving precision for
    // large k where k^2 itself cannot be represented exactly in a double.
    const std::uint64_t sq = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    const double a = -kPi * static_cast<double>(sq) / static_cast<double>(n);
    plan->chirp[k] = Complex(std::cos(a), std::sin(a));
  }
  std::vector<Complex> b(plan->m, Complex(0.0, 0.0));
  b[0] = Complex(1.0, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const Complex v = std::conj(plan->chirp[k]);
    b[k] = v;
    b[plan->m - k] = v;
  }
  fft_pow2(b, false);
  plan->fft_filter = std::move(b);

  cache.emplace(n, plan);
  return plan;
}

std::vector<Complex> bluestein(const std::vector<Complex>& x) {
  const std::size_t n = x.size();
  const auto plan = bluestein_plan(n);
  const std::size_t m = plan->m;

  std::vector<Complex> a(m, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * plan->chirp[k];
  fft_pow2(a, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= plan->fft_filter[k];
  fft_pow2(a, true);

  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * plan->chirp[k];
  return out;
}

}  // namespace

void fft_pow2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (!is_pow2(n)) throw ValidationError("fft_pow2: size must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const auto& tw = twiddles_for(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        Complex w = tw[j * step];
        if (inverse) w = std::conj(w);
        const Complex u = a[i + j];
        const Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= scale;
  }
}

std::vector<Complex> dft(const std::vector<Complex>& x, bool inverse) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (n == 1) return x;

  if (is_pow2(n)) {
    std::vector<Complex> a = x;
    fft_pow2(a, inverse);
    return a;
  }

  if (!inverse) return bluestein(x);

  // IDFT(x) = conj(DFT(conj(x))) / n
  std::vector<Complex> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = std::conj(x[k]);
  std::vector<Complex> y = bluestein(c);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = std::conj(y[k]) * scale;
  return y;
}

}  // namespace spoofkit::fft
