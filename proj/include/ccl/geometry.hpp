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
#include <utility>
#include <vector>

namespace ccl {

// Axis-aligned box in integer pixel coordinates, top-left origin.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int x2() const { return x + w; }
  int y2() const { return y + h; }
  int64_t area() const { return static_cast<int64_t>(w) * h; }
  bool valid() const { return w > 0 && h > 0; }

  bool operator==(const BBox& other) const {
    return x == other.x && y == other.y && w == other.w && h == other.h;
  }
};

// Intersection over union on continuous box area.
double iou(const BBox& a, const BBox& b);

// True iff the intersection has positive area; edge-touching boxes do not
// intersect.
bool intersects(const BBox& a, const BBox& b);

// Binary raster, 1 = foreground.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  static Mask make(int w, int h, uint8_t fill = 0) {
    Mask m;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<size_t>(w) * h, fill ? 1 : 0);
    return m;
  }

  uint8_t at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x]; }
  void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  size_t count() const;
};

// Tightest box containing every set bit. Throws EmptyMaskError when none set.
BBox mask_to_bbox(const Mask& m);

// Candidate placement positions for object insertion.
struct PositionGrid {
  int image_w = 0;
  int image_h = 0;
  std::vector<std::pair<int, int>> positions;
};

// Deterministic near-uniform lattice of exactly n in-bounds positions:
// ceil(sqrt(n)) columns, enough rows to cover n, points at cell centers,
// truncated to n.
PositionGrid candidate_grid(int image_w, int image_h, int n);

}  // namespace ccl
