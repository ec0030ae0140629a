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

#include "ccl/image.hpp"

#include <algorithm>
#include <cmath>

#include "ccl/errors.hpp"

namespace ccl {

namespace {

uint8_t round_to_u8(double v) {
  double r = std::floor(v + 0.5);
  if (r < 0.0) r = 0.0;
  if (r > 255.0) r = 255.0;
  return static_cast<uint8_t>(r);
}

}  // namespace

Image resize_bilinear(const Image& src, int out_w, int out_h) {
  if (src.empty() || out_w <= 0 || out_h <= 0) {
    throw OutOfBoundsError("resize_bilinear: empty source or non-positive target");
  }
  if (out_w == src.width && out_h == src.height) return src;

  Image dst = Image::make(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = src.at(x0, y0, c) * (1.0 - wx) + src.at(x1, y0, c) * wx;
        const double bot = src.at(x0, y1, c) * (1.0 - wx) + src.at(x1, y1, c) * wx;
        dst.at(x, y, c) = round_to_u8(top * (1.0 - wy) + bot * wy);
      }
    }
  }
  return dst;
}

Image resize_area(const Image& src, int out_w, int out_h) {
  if (src.empty() || out_w <= 0 || out_h <= 0) {
    throw OutOfBoundsError("resize_area: empty source or non-positive target");
  }
  if (out_w == src.width && out_h == src.height) return src;

  Image dst = Image::make(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  std::vector<double> acc(src.channels);
  for (int y = 0; y < out_h; ++y) {
    const double y_lo = y * sy;
    const double y_hi = std::min((y + 1) * sy, static_cast<double>(src.height));
    for (int x = 0; x < out_w; ++x) {
      const double x_lo = x * sx;
      const double x_hi = std::min((x + 1) * sx, static_cast<double>(src.width));
      std::fill(acc.begin(), acc.end(), 0.0);
      double area = 0.0;
      for (int yy = static_cast<int>(std::floor(y_lo)); yy < static_cast<int>(std::ceil(y_hi)); ++yy) {
        const double hy = std::min(y_hi, yy + 1.0) - std::max(y_lo, static_cast<double>(yy));
        if (hy <= 0.0) continue;
        for (int xx = static_cast<int>(std::floor(x_lo)); xx < static_cast<int>(std::ceil(x_hi)); ++xx) {
          const double wx = std::min(x_hi, xx + 1.0) - std::max(x_lo, static_cast<double>(xx));
          if (wx <= 0.0) continue;
          const double w = wx * hy;
          area += w;
          for (int c = 0; c < src.channels; ++c) acc[c] += w * src.at(xx, yy, c);
        }
      }
      for (int c = 0; c < src.channels; ++c) {
        dst.at(x, y, c) = round_to_u8(acc[c] / area);
      }
    }
  }
  return dst;
}

}  // namespace ccl
