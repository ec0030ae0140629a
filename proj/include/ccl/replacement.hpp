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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccl/annotations.hpp"
#include "ccl/augment.hpp"
#include "ccl/background.hpp"
#include "ccl/geometry.hpp"

namespace ccl {

struct QualityFilterParams {
  double t_iou = 0.75;
  bool erode = false;  // 1-pixel erosion of masks before extraction
};

struct FilterResult {
  bool accepted = false;
  double iou = 0.0;
};

// Same-foreground variants of one source image.
struct VariantGroup {
  std::string source_id;
  std::vector<AnnotatedImage> variants;
  std::vector<std::string> background_ids;
};

struct ExpandResult {
  std::optional<VariantGroup> group;  // set iff accepted
  std::string reject_reason;          // set iff rejected
  std::vector<double> mask_ious;      // per annotation, in order

  bool accepted() const { return group.has_value(); }
};

// Masks travel as single-channel PNGs, 0 = background, 255 = foreground.
Mask mask_from_image(const Image& img);
Image mask_to_image(const Mask& m);
Mask load_mask(const std::string& path);
void save_mask(const std::string& path, const Mask& m);

// 1-pixel erosion with a full 3x3 element; pixels on the raster border erode
// away.
Mask erode_mask(const Mask& m);

// RGBA cutout cropped to the mask's tight box; alpha mirrors the mask bits.
ObjectCutout extract_foreground(const Image& img, const Mask& m, int category_id = 0);

// Accepts iff iou(mask_to_bbox(m), gt) is strictly greater than t_iou.
FilterResult mask_quality_filter(const Mask& m, const BBox& gt,
                                 const QualityFilterParams& p);

// Paints each cutout over the background at its position; later entries win
// where opaque.
Image composite(const std::vector<std::pair<ObjectCutout, std::pair<int, int>>>& cutouts,
                const Image& bg);

// Builds k same-foreground variants of img on backgrounds sampled without
// replacement from the pool. The whole image is rejected when any mask fails
// the quality filter.
ExpandResult expand_image(const AnnotatedImage& img, const std::vector<Mask>& masks,
                          const std::vector<BackgroundRecord>& pool, int k,
                          const QualityFilterParams& filter, uint64_t seed,
                          const std::string& pool_root);

}  // namespace ccl
