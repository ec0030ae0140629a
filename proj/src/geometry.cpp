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

#include "ccl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccl/errors.hpp"

namespace ccl {

namespace {

int64_t intersection_area(const BBox& a, const BBox& b) {
  const int ix = std::max(a.x, b.x);
  const int iy = std::max(a.y, b.y);
  const int ix2 = std::min(a.x2(), b.x2());
  const int iy2 = std::min(a.y2(), b.y2());
  if (ix2 <= ix || iy2 <= iy) return 0;
  return static_cast<int64_t>(ix2 - ix) * (iy2 - iy);
}

}  // namespace

double iou(const BBox& a, const BBox& b) {
  const int64_t inter = intersection_area(a, b);
  if (inter == 0) return 0.0;
  const int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool intersects(const BBox& a, const BBox& b) {
  return intersection_area(a, b) > 0;
}

size_t Mask::count() const {
  return static_cast<size_t>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

BBox mask_to_bbox(const Mask& m) {
  int min_x = m.width, min_y = m.height, max_x = -1, max_y = -1;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) throw EmptyMaskError("mask_to_bbox: no foreground bit set");
  return BBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

PositionGrid candidate_grid(int image_w, int image_h, int n) {
  if (n < 1 || image_w <= 0 || image_h <= 0) {
    throw OutOfBoundsError("candidate_grid: need n >= 1 and positive dimensions");
  }
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;
  const double cell_w = static_cast<double>(image_w) / cols;
  const double cell_h = static_cast<double>(image_h) / rows;

  PositionGrid grid;
  grid.image_w = image_w;
  grid.image_h = image_h;
  grid.positions.reserve(static_cast<size_t>(n));
  for (int r = 0; r < rows && static_cast<int>(grid.positions.size()) < n; ++r) {
    const int y = std::min(image_h - 1, static_cast<int>(std::floor(cell_h * (r + 0.5))));
    for (int c = 0; c < cols && static_cast<int>(grid.positions.size()) < n; ++c) {
      const int x = std::min(image_w - 1, static_cast<int>(std::floor(cell_w * (c + 0.5))));
      grid.positions.emplace_back(x, y);
    }
  }
  return grid;
}

}  // namespace ccl
