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

#include "fixtures.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccl/image_io.hpp"
#include "ccl/replacement.hpp"

namespace fixtures {

namespace fs = std::filesystem;

std::string make_temp_dir(const std::string& tag) {
  static std::atomic<uint64_t> counter{0};
  const fs::path base = fs::temp_directory_path() / "ccl_tests";
  fs::create_directories(base);
  const fs::path dir =
      base / (tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter.fetch_add(1)));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

uint64_t hash_tree(const std::string& dir) {
  std::vector<std::string> rel_paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    rel_paths.push_back(fs::relative(entry.path(), dir).generic_string());
  }
  std::sort(rel_paths.begin(), rel_paths.end());
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& rel : rel_paths) {
    mix(rel.data(), rel.size());
    const auto bytes = ccl::read_binary_file((fs::path(dir) / rel).string());
    mix(bytes.data(), bytes.size());
  }
  return h;
}

ccl::AnnotationDoc make_synthetic_dataset(const std::string& dir,
                                          const DatasetOptions& opt) {
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "masks");

  ccl::AnnotationDoc doc;
  for (int c = 0; c < opt.n_categories; ++c) {
    doc.categories.push_back({c, "cat_" + std::to_string(c)});
  }

  for (int i = 0; i < opt.n_images; ++i) {
    const std::string id = "img" + (i < 10 ? std::string("0") : std::string("")) +
                           std::to_string(i);
    ccl::Rng rng = ccl::Rng::for_stream(opt.seed, id);

    // Gradient background, hue varied per image.
    ccl::Image img = ccl::Image::make(opt.width, opt.height, 3);
    const int hue = static_cast<int>(rng.uniform_below(128));
    for (int y = 0; y < opt.height; ++y) {
      for (int x = 0; x < opt.width; ++x) {
        img.at(x, y, 0) = static_cast<uint8_t>((x * 180 / opt.width + hue) & 0xff);
        img.at(x, y, 1) = static_cast<uint8_t>((y * 180 / opt.height + hue / 2) & 0xff);
        img.at(x, y, 2) = static_cast<uint8_t>(200 - (hue / 3));
      }
    }

    // Non-overlapping solid rectangles; mask equals the box exactly.
    const int want = 1 + static_cast<int>(rng.uniform_below(
                             static_cast<uint64_t>(opt.max_objects)));
    std::vector<ccl::BBox> placed;
    int ann_index = 0;
    for (int o = 0; o < want; ++o) {
      ccl::BBox box;
      bool ok = false;
      for (int tries = 0; tries < 50 && !ok; ++tries) {
        box.w = 8 + static_cast<int>(rng.uniform_below(9));
        box.h = 8 + static_cast<int>(rng.uniform_below(9));
        box.x = static_cast<int>(rng.uniform_below(
            static_cast<uint64_t>(opt.width - box.w + 1)));
        box.y = static_cast<int>(rng.uniform_below(
            static_cast<uint64_t>(opt.height - box.h + 1)));
        ok = true;
        for (const auto& other : placed) {
          if (ccl::intersects(box, other)) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) break;
      placed.push_back(box);

      const int category = static_cast<int>(
          rng.uniform_below(static_cast<uint64_t>(opt.n_categories)));
      const uint8_t cr = static_cast<uint8_t>(40 + category * 50);
      const uint8_t cg = static_cast<uint8_t>(220 - category * 40);
      const uint8_t cb = static_cast<uint8_t>(30 + category * 60);
      for (int y = box.y; y < box.y2(); ++y) {
        for (int x = box.x; x < box.x2(); ++x) {
          img.at(x, y, 0) = cr;
          img.at(x, y, 1) = cg;
          img.at(x, y, 2) = cb;
        }
      }

      ccl::Mask mask = ccl::Mask::make(opt.width, opt.height);
      for (int y = box.y; y < box.y2(); ++y) {
        for (int x = box.x; x < box.x2(); ++x) mask.set(x, y, true);
      }
      ccl::save_mask(
          (fs::path(dir) / "masks" / (id + "_" + std::to_string(ann_index) + ".png"))
              .string(),
          mask);

      ccl::AnnotationRecord rec;
      rec.image_id = id;
      rec.bbox = box;
      rec.category_id = category;
      if (opt.with_description_types) {
        rec.description = "object of kind " + std::to_string(category);
        rec.description_type = category % 2 == 0 ? "presence" : "absence";
      }
      doc.annotations.push_back(std::move(rec));
      ++ann_index;
    }

    ccl::save_png((fs::path(dir) / "images" / (id + ".png")).string(), img);
    doc.images.push_back({id, "images/" + id + ".png", opt.width, opt.height});
  }

  ccl::save_annotation_doc((fs::path(dir) / "annotations.json").string(), doc);
  return doc;
}

ccl::FeatureBatch random_batch(int c, int k, int d, uint64_t seed) {
  ccl::FeatureBatch fb = ccl::FeatureBatch::zeros(c, k, d);
  ccl::Rng rng(seed);
  for (auto& v : fb.values) v = rng.normal();
  // Nudge any catastrophically small vector away from zero norm.
  for (int ci = 0; ci < c; ++ci) {
    for (int ki = 0; ki < k; ++ki) {
      double norm2 = 0.0;
      for (int di = 0; di < d; ++di) norm2 += fb.at(ci, ki, di) * fb.at(ci, ki, di);
      if (norm2 < 1e-12) fb.at(ci, ki, 0) += 1.0;
    }
  }
  return fb;
}

int run_tool(const std::vector<std::string>& args) {
  std::ostringstream cmd;
  cmd << CCL_TOOL_BIN;
  for (const auto& a : args) cmd << " \"" << a << "\"";
  cmd << " > /dev/null 2>&1";
  const int status = std::system(cmd.str().c_str());
  return status == -1 ? -1 : WEXITSTATUS(status);
}

}  // namespace fixtures
