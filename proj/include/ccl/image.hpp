// Copyright 2026 The ccl Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <vector>

namespace ccl {

// Interleaved 8-bit raster. channels is 1 (gray/mask), 3 (RGB) or 4 (RGBA).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> data;

  static Image make(int w, int h, int c, uint8_t fill = 0) {
    Image img;
    img.width = w;
    img.height = h;
    img.channels = c;
    img.data.assign(static_cast<size_t>(w) * h * c, fill);
    return img;
  }

  bool empty() const { return data.empty(); }

  size_t index(int x, int y, int c = 0) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }

  uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }

  bool operator==(const Image& other) const {
    return width == other.width && height == other.height &&
           channels == other.channels && data == other.data;
  }
};

// Bilinear resample (half-pixel centers). Used to fit pooled backgrounds to a
// foreground's dimensions.
Image resize_bilinear(const Image& src, int out_w, int out_h);

// Exact area-average resample. Preserves mean intensity when downscaling, so
// shrunken cutouts keep clean silhouettes.
Image resize_area(const Image& src, int out_w, int out_h);

}  // namespace ccl
