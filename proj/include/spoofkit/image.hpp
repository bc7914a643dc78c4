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

#ifndef SPOOFKIT_IMAGE_HPP_
#define SPOOFKIT_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spoofkit/spectral.hpp"

namespace spoofkit {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // RGB8, row-major, top row first

  const std::uint8_t* at(int row, int col) const {
    return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
  }
};

// 256-entry magma lookup table (RGB8).
extern const std::uint8_t kMagmaLut[256][3];

// Min-max scales the matrix to [0,1], maps through the magma LUT, and
// bilinearly resizes (corner-aligned) to width x height. Low mel bands end
// up at the bottom of the image. A constant matrix maps to LUT entry 0.
RgbImage render_image(const MelSpectrogram& m, int width = 299, int height = 299);

// Minimal PNG encoder (8-bit RGB, stored-deflate zlib stream). Output is
// deterministic for identical input.
void write_png(const RgbImage& img, const std::filesystem::path& path);

}  // namespace spoofkit

#endif  // SPOOFKIT_IMAGE_HPP_
