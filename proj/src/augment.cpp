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

#include "ccl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ccl/errors.hpp"

namespace ccl {

namespace {

// Tight box around alpha == 255 pixels, or nullopt when none.
std::optional<BBox> opaque_bbox(const Image& rgba) {
  int min_x = rgba.width, min_y = rgba.height, max_x = -1, max_y = -1;
  for (int y = 0; y < rgba.height; ++y) {
    for (int x = 0; x < rgba.width; ++x) {
      if (rgba.at(x, y, 3) != 255) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) return std::nullopt;
  return BBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

Image crop(const Image& src, const BBox& box) {
  Image out = Image::make(box.w, box.h, src.channels);
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      for (int c = 0; c < src.channels; ++c) {
        out.at(x, y, c) = src.at(box.x + x, box.y + y, c);
      }
    }
  }
  return out;
}

}  // namespace

ObjectCutout ObjectCutout::from_rgba(Image rgba, int category_id) {
  if (rgba.channels != 4 || rgba.empty()) {
    throw OutOfBoundsError("cutout: expected a non-empty RGBA raster");
  }
  const auto tight = opaque_bbox(rgba);
  if (!tight) throw EmptyMaskError("cutout: no opaque pixel");
  ObjectCutout cut;
  if (tight->w != rgba.width || tight->h != rgba.height) {
    cut.pixels = crop(rgba, *tight);
  } else {
    cut.pixels = std::move(rgba);
  }
  // Alpha is binary by construction everywhere in the pipeline.
  for (size_t i = 3; i < cut.pixels.data.size(); i += 4) {
    cut.pixels.data[i] = cut.pixels.data[i] >= 128 ? 255 : 0;
  }
  cut.category_id = category_id;
  return cut;
}

std::optional<ObjectCutout> scale_cutout(const ObjectCutout& cutout, int w, int h) {
  if (w < 1 || h < 1) return std::nullopt;
  Image scaled = resize_area(cutout.pixels, w, h);
  bool any = false;
  for (size_t i = 3; i < scaled.data.size(); i += 4) {
    const bool opaque = scaled.data[i] >= 128;
    scaled.data[i] = opaque ? 255 : 0;
    any = any || opaque;
  }
  if (!any) return std::nullopt;
  return ObjectCutout::from_rgba(std::move(scaled), cutout.category_id);
}

std::vector<std::pair<int, int>> free_positions(const AnnotatedImage& img,
                                                int cutout_w, int cutout_h,
                                                const PositionGrid& grid) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [x, y] : grid.positions) {
    if (x + cutout_w > img.pixels.width || y + cutout_h > img.pixels.height) continue;
    const BBox candidate{x, y, cutout_w, cutout_h};
    bool blocked = false;
    for (const auto& ann : img.annotations) {
      if (intersects(candidate, ann.bbox)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) out.emplace_back(x, y);
  }
  return out;
}

std::optional<std::pair<int, int>> find_placement(const AnnotatedImage& img,
                                                  int cutout_w, int cutout_h,
                                                  const PositionGrid& grid,
                                                  Rng& rng) {
  const auto free = free_positions(img, cutout_w, cutout_h, grid);
  if (free.empty()) return std::nullopt;
  return free[rng.uniform_below(free.size())];
}

AnnotatedImage place_object(const AnnotatedImage& img, const ObjectCutout& cutout,
                            std::pair<int, int> pos) {
  const auto [px, py] = pos;
  if (px < 0 || py < 0 || px + cutout.native_w() > img.pixels.width ||
      py + cutout.native_h() > img.pixels.height) {
    throw OutOfBoundsError("place_object: cutout exceeds the canvas");
  }
  AnnotatedImage out = img;
  for (int y = 0; y < cutout.native_h(); ++y) {
    for (int x = 0; x < cutout.native_w(); ++x) {
      if (cutout.pixels.at(x, y, 3) != 255) continue;
      for (int c = 0; c < 3; ++c) {
        out.pixels.at(px + x, py + y, c) = cutout.pixels.at(x, y, c);
      }
    }
  }
  Annotation ann;
  ann.bbox = BBox{px, py, cutout.native_w(), cutout.native_h()};
  ann.category_id = cutout.category_id;
  out.annotations.push_back(std::move(ann));
  return out;
}

AugmentOutcome categorical_augment(const AnnotatedImage& img,
                                   const std::vector<ObjectCutout>& donor_pool,
                                   const AugmentParams& params) {
  std::unordered_set<int> present;
  for (const auto& ann : img.annotations) present.insert(ann.category_id);

  std::vector<int> eligible;
  for (size_t i = 0; i < donor_pool.size(); ++i) {
    if (!present.count(donor_pool[i].category_id)) eligible.push_back(static_cast<int>(i));
  }
  if (eligible.empty()) {
    throw EmptyDonorPoolError("categorical_augment: no donor from an unseen category");
  }

  Rng rng = Rng::for_stream(params.seed, img.source_id);
  const int donor_index = eligible[rng.uniform_below(eligible.size())];
  const ObjectCutout& donor = donor_pool[donor_index];
  const PositionGrid grid =
      candidate_grid(img.pixels.width, img.pixels.height, params.n_positions);

  AugmentOutcome outcome;
  outcome.donor_index = donor_index;

  for (int attempt = 0; attempt <= params.n_r; ++attempt) {
    const double divisor = std::pow(params.alpha, attempt);
    const int w = std::max(1, static_cast<int>(std::floor(donor.native_w() / divisor)));
    const int h = std::max(1, static_cast<int>(std::floor(donor.native_h() / divisor)));
    outcome.attempt_dims.emplace_back(w, h);

    std::optional<ObjectCutout> scaled =
        attempt == 0 ? std::optional<ObjectCutout>(donor) : scale_cutout(donor, w, h);
    if (scaled) {
      const auto free = free_positions(img, scaled->native_w(), scaled->native_h(), grid);
      if (static_cast<int>(free.size()) >= params.min_free_positions) {
        const auto pos = free[rng.uniform_below(free.size())];
        outcome.image = place_object(img, *scaled, pos);
        outcome.placed = std::move(*scaled);
        outcome.position = pos;
        return outcome;
      }
    }
  }
  outcome.skip_reason = "resize-exhausted";
  return outcome;
}

}  // namespace ccl
