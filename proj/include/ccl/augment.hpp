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
#include "ccl/geometry.hpp"
#include "ccl/image.hpp"
#include "ccl/rng.hpp"

namespace ccl {

// Foreground pixels with binary alpha, cropped tight around the opaque
// region.
struct ObjectCutout {
  Image pixels;  // RGBA, alpha is 0 or 255
  int category_id = 0;

  int native_w() const { return pixels.width; }
  int native_h() const { return pixels.height; }

  // Validates the invariants: at least one opaque pixel, canvas tight around
  // the opaque region. Throws EmptyMaskError / OutOfBoundsError.
  static ObjectCutout from_rgba(Image rgba, int category_id);
};

// Area-average downscale with binary re-thresholded alpha, re-cropped tight.
// Returns nullopt when nothing stays opaque at the target size.
std::optional<ObjectCutout> scale_cutout(const ObjectCutout& cutout, int w, int h);

struct AugmentParams {
  int n_positions = 100;      // candidate placement positions
  double alpha = 2.0;         // downscale divisor per resize attempt
  int n_r = 2;                // max resize attempts before giving up
  int min_free_positions = 5; // below this, resize instead of placing
  uint64_t seed = 0;
};

// Grid positions where a w x h box (anchored at its top-left) stays in
// bounds and overlaps no existing annotation box.
std::vector<std::pair<int, int>> free_positions(const AnnotatedImage& img,
                                                int cutout_w, int cutout_h,
                                                const PositionGrid& grid);

// Uniform seeded pick among the free positions; nullopt when none exist.
std::optional<std::pair<int, int>> find_placement(const AnnotatedImage& img,
                                                  int cutout_w, int cutout_h,
                                                  const PositionGrid& grid,
                                                  Rng& rng);

// Composites the cutout at pos and appends its annotation. The input image
// is left untouched.
AnnotatedImage place_object(const AnnotatedImage& img, const ObjectCutout& cutout,
                            std::pair<int, int> pos);

struct AugmentOutcome {
  std::optional<AnnotatedImage> image;  // set iff augmented
  std::string skip_reason;              // set iff skipped
  int donor_index = -1;                 // index into the donor pool
  std::optional<ObjectCutout> placed;   // the cutout as composited
  std::pair<int, int> position{0, 0};   // its top-left anchor
  // Scheduled (w, h) of each placement attempt: native, native/alpha, ...
  std::vector<std::pair<int, int>> attempt_dims;

  bool augmented() const { return image.has_value(); }
};

// One donor insertion with the resize/retry/abandon policy: pick a donor at
// random among those whose category the image lacks, try to place it; while
// fewer than min_free_positions grid cells are free, shrink the donor by
// 1/alpha and retry, up to n_r resizes; then give up on this image.
AugmentOutcome categorical_augment(const AnnotatedImage& img,
                                   const std::vector<ObjectCutout>& donor_pool,
                                   const AugmentParams& params);

}  // namespace ccl
