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

#include "ccl/replacement.hpp"

#include <filesystem>
#include <numeric>

#include "ccl/errors.hpp"
#include "ccl/image_io.hpp"

namespace ccl {

namespace fs = std::filesystem;

Mask mask_from_image(const Image& img) {
  Mask m;
  m.width = img.width;
  m.height = img.height;
  m.bits.resize(static_cast<size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      m.bits[static_cast<size_t>(y) * img.width + x] = img.at(x, y, 0) >= 128 ? 1 : 0;
    }
  }
  return m;
}

Image mask_to_image(const Mask& m) {
  Image img = Image::make(m.width, m.height, 1);
  for (size_t i = 0; i < m.bits.size(); ++i) img.data[i] = m.bits[i] ? 255 : 0;
  return img;
}

Mask load_mask(const std::string& path) { return mask_from_image(load_image(path)); }

void save_mask(const std::string& path, const Mask& m) {
  save_png(path, mask_to_image(m));
}

Mask erode_mask(const Mask& m) {
  Mask out = Mask::make(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      bool keep = x > 0 && y > 0 && x < m.width - 1 && y < m.height - 1;
      for (int dy = -1; keep && dy <= 1; ++dy) {
        for (int dx = -1; keep && dx <= 1; ++dx) {
          keep = m.at(x + dx, y + dy) != 0;
        }
      }
      out.set(x, y, keep);
    }
  }
  return out;
}

ObjectCutout extract_foreground(const Image& img, const Mask& m, int category_id) {
  if (m.width != img.width || m.height != img.height) {
    throw OutOfBoundsError("extract_foreground: mask dims do not match image");
  }
  const BBox box = mask_to_bbox(m);  // throws EmptyMaskError
  Image rgba = Image::make(box.w, box.h, 4);
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        rgba.at(x, y, c) = img.at(box.x + x, box.y + y, c);
      }
      rgba.at(x, y, 3) = m.at(box.x + x, box.y + y) ? 255 : 0;
    }
  }
  return ObjectCutout::from_rgba(std::move(rgba), category_id);
}

FilterResult mask_quality_filter(const Mask& m, const BBox& gt,
                                 const QualityFilterParams& p) {
  const BBox mask_box = mask_to_bbox(m);  // throws EmptyMaskError
  FilterResult result;
  result.iou = iou(mask_box, gt);
  result.accepted = result.iou > p.t_iou;  // strictly greater
  return result;
}

Image composite(const std::vector<std::pair<ObjectCutout, std::pair<int, int>>>& cutouts,
                const Image& bg) {
  Image out = bg;
  for (const auto& [cutout, pos] : cutouts) {
    const auto [px, py] = pos;
    if (px < 0 || py < 0 || px + cutout.native_w() > bg.width ||
        py + cutout.native_h() > bg.height) {
      throw OutOfBoundsError("composite: cutout exceeds the background");
    }
    for (int y = 0; y < cutout.native_h(); ++y) {
      for (int x = 0; x < cutout.native_w(); ++x) {
        if (cutout.pixels.at(x, y, 3) != 255) continue;
        for (int c = 0; c < 3; ++c) {
          out.at(px + x, py + y, c) = cutout.pixels.at(x, y, c);
        }
      }
    }
  }
  return out;
}

ExpandResult expand_image(const AnnotatedImage& img, const std::vector<Mask>& masks,
                          const std::vector<BackgroundRecord>& pool, int k,
                          const QualityFilterParams& filter, uint64_t seed,
                          const std::string& pool_root) {
  if (masks.size() != img.annotations.size()) {
    throw ConfigInvalidError("expand_image: need exactly one mask per annotation");
  }
  ExpandResult result;

  // One bad mask rejects the whole image; dropping an object would leave its
  // ground-truth box pointing at background.
  for (size_t i = 0; i < masks.size(); ++i) {
    const FilterResult fr = mask_quality_filter(masks[i], img.annotations[i].bbox, filter);
    result.mask_ious.push_back(fr.iou);
    if (!fr.accepted) {
      result.reject_reason = "mask-quality";
      return result;
    }
  }

  if (static_cast<int>(pool.size()) < k) {
    throw PoolTooSmallError("expand_image: pool holds " + std::to_string(pool.size()) +
                            " records, need " + std::to_string(k));
  }

  std::vector<std::pair<ObjectCutout, std::pair<int, int>>> cutouts;
  for (size_t i = 0; i < masks.size(); ++i) {
    const Mask* m = &masks[i];
    Mask eroded;
    if (filter.erode) {
      eroded = erode_mask(masks[i]);
      if (eroded.count() == 0) {
        result.reject_reason = "mask-empty-after-erosion";
        return result;
      }
      m = &eroded;
    }
    const BBox box = mask_to_bbox(*m);
    cutouts.emplace_back(extract_foreground(img.pixels, *m, img.annotations[i].category_id),
                         std::make_pair(box.x, box.y));
  }

  // Seeded sample of k distinct pool entries via partial Fisher-Yates.
  Rng rng = Rng::for_stream(seed, img.source_id);
  std::vector<size_t> order(pool.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (int j = 0; j < k; ++j) {
    const size_t swap_with = j + rng.uniform_below(order.size() - j);
    std::swap(order[j], order[swap_with]);
  }

  VariantGroup group;
  group.source_id = img.source_id;
  for (int j = 0; j < k; ++j) {
    const BackgroundRecord& rec = pool[order[j]];
    const fs::path bg_path = fs::path(pool_root) / rec.image_path;
    Image bg = load_image(bg_path.string());
    if (bg.channels != 3) {
      throw ConfigInvalidError("background must be RGB: " + rec.image_path);
    }
    bg = resize_bilinear(bg, img.pixels.width, img.pixels.height);
    AnnotatedImage variant;
    variant.pixels = composite(cutouts, bg);
    variant.annotations = img.annotations;
    variant.source_id = img.source_id;
    group.variants.push_back(std::move(variant));
    group.background_ids.push_back(rec.id);
  }
  result.group = std::move(group);
  return result;
}

}  // namespace ccl
