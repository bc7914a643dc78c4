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

#ifndef SPOOFKIT_TESTS_TESTING_UTIL_HPP_
#define SPOOFKIT_TESTS_TESTING_UTIL_HPP_

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spoofkit/audio_io.hpp"
#include "spoofkit/rng.hpp"

namespace spoofkit::testing {

// Self-deleting unique directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& hint) {
    static std::atomic<std::uint64_t> counter{0};
    const auto n = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("spoofkit_" + hint + "_" + std::to_string(::getpid()) + "_" + std::to_string(n));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Waveform make_tone(double freq, double seconds, int rate, double amp = 1.0) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amp * std::cos(2.0 * 3.14159265358979323846 * freq *
                                  static_cast<double>(i) / rate);
  }
  return w;
}

inline Waveform make_noise(Rng& rng, std::size_t n, int rate, double amp = 1.0) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (auto& x : w.samples) x = amp * rng.uniform(-1.0, 1.0);
  return w;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
}

}  // namespace spoofkit::testing

#endif  // SPOOFKIT_TESTS_TESTING_UTIL_HPP_
