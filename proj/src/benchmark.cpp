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

#include "ccl/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ccl/errors.hpp"
#include "ccl/image_io.hpp"
#include "ccl/parallel.hpp"
#include "ccl/replacement.hpp"
#include "ccl/rng.hpp"

namespace ccl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string corruption_name(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::gaussian_noise: return "gaussian_noise";
    case CorruptionKind::contrast: return "contrast";
    case CorruptionKind::saturation: return "saturation";
    case CorruptionKind::lighting: return "lighting";
  }
  return "gaussian_noise";
}

CorruptionKind corruption_from_name(const std::string& name) {
  if (name == "gaussian_noise") return CorruptionKind::gaussian_noise;
  if (name == "contrast") return CorruptionKind::contrast;
  if (name == "saturation") return CorruptionKind::saturation;
  if (name == "lighting") return CorruptionKind::lighting;
  throw ConfigInvalidError("unknown corruption kind: " + name);
}

std::vector<CorruptionKind> all_corruption_kinds() {
  return {CorruptionKind::gaussian_noise, CorruptionKind::contrast,
          CorruptionKind::saturation, CorruptionKind::lighting};
}

namespace {

uint8_t clamp_round(double v) {
  const double r = std::floor(v + 0.5);
  if (r < 0.0) return 0;
  if (r > 255.0) return 255;
  return static_cast<uint8_t>(r);
}

// RGB <-> HSL on [0,1] doubles, hue in degrees.
void rgb_to_hsl(double r, double g, double b, double& h, double& s, double& l) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  l = (mx + mn) / 2.0;
  if (mx == mn) {
    h = 0.0;
    s = 0.0;
    return;
  }
  const double c = mx - mn;
  s = c / (1.0 - std::fabs(2.0 * l - 1.0));
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / c, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / c + 2.0);
  } else {
    h = 60.0 * ((r - g) / c + 4.0);
  }
  if (h < 0.0) h += 360.0;
}

void hsl_to_rgb(double h, double s, double l, double& r, double& g, double& b) {
  const double c = (1.0 - std::fabs(2.0 * l - 1.0)) * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r1 = 0, g1 = 0, b1 = 0;
  if (hp < 1.0) {
    r1 = c; g1 = x;
  } else if (hp < 2.0) {
    r1 = x; g1 = c;
  } else if (hp < 3.0) {
    g1 = c; b1 = x;
  } else if (hp < 4.0) {
    g1 = x; b1 = c;
  } else if (hp < 5.0) {
    r1 = x; b1 = c;
  } else {
    r1 = c; b1 = x;
  }
  const double m = l - c / 2.0;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

void require_rgb(const Image& img, const char* op) {
  if (img.channels != 3 || img.empty()) {
    throw ConfigInvalidError(std::string(op) + ": expected a non-empty RGB image");
  }
}

}  // namespace

Image apply_gaussian_noise(const Image& img, double sigma, uint64_t seed) {
  require_rgb(img, "gaussian_noise");
  Rng rng(seed);
  Image out = img;
  for (size_t i = 0; i < img.data.size(); ++i) {
    const double v = img.data[i] / 255.0 + sigma * rng.normal();
    out.data[i] = clamp_round(v * 255.0);
  }
  return out;
}

Image apply_contrast(const Image& img, double factor) {
  require_rgb(img, "contrast");
  Image out = img;
  for (size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = clamp_round((img.data[i] - 127.5) * factor + 127.5);
  }
  return out;
}

Image apply_saturation(const Image& img, double factor) {
  require_rgb(img, "saturation");
  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double h, s, l;
      rgb_to_hsl(img.at(x, y, 0) / 255.0, img.at(x, y, 1) / 255.0,
                 img.at(x, y, 2) / 255.0, h, s, l);
      s = std::clamp(s * factor, 0.0, 1.0);
      double r, g, b;
      hsl_to_rgb(h, s, l, r, g, b);
      out.at(x, y, 0) = clamp_round(r * 255.0);
      out.at(x, y, 1) = clamp_round(g * 255.0);
      out.at(x, y, 2) = clamp_round(b * 255.0);
    }
  }
  return out;
}

Image apply_lighting(const Image& img, double offset) {
  require_rgb(img, "lighting");
  Image out = img;
  for (size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = clamp_round(img.data[i] + offset * 255.0);
  }
  return out;
}

Image corrupt(const Image& img, const CorruptionSpec& spec,
              const CorruptionTables& tables) {
  if (spec.severity < 1 || spec.severity > 5) {
    throw ConfigInvalidError("corrupt: severity must be in 1..5");
  }
  const int s = spec.severity - 1;
  switch (spec.kind) {
    case CorruptionKind::gaussian_noise:
      return apply_gaussian_noise(img, tables.noise_sigma[s], spec.seed);
    case CorruptionKind::contrast:
      return apply_contrast(img, tables.contrast_factor[s]);
    case CorruptionKind::saturation:
      return apply_saturation(img, tables.saturation_factor[s]);
    case CorruptionKind::lighting:
      return apply_lighting(img, tables.lighting_offset[s]);
  }
  throw ConfigInvalidError("corrupt: unknown kind");
}

namespace {

void append_image_to_doc(AnnotationDoc& doc, const AnnotatedImage& img,
                         const std::string& id, const std::string& rel_path) {
  doc.images.push_back({id, rel_path, img.pixels.width, img.pixels.height});
  for (const auto& ann : img.annotations) {
    AnnotationRecord rec;
    rec.image_id = id;
    rec.bbox = ann.bbox;
    rec.category_id = ann.category_id;
    rec.description = ann.description;
    rec.description_type = ann.description_type;
    doc.annotations.push_back(std::move(rec));
  }
}

void copy_categories(AnnotationDoc& doc, const std::vector<AnnotatedImage>& dataset) {
  std::unordered_set<int> seen;
  for (const auto& img : dataset) {
    for (const auto& ann : img.annotations) {
      if (seen.insert(ann.category_id).second) {
        doc.categories.push_back({ann.category_id, "category_" + std::to_string(ann.category_id)});
      }
    }
  }
  std::sort(doc.categories.begin(), doc.categories.end(),
            [](const CategoryEntry& a, const CategoryEntry& b) { return a.id < b.id; });
}

}  // namespace

BenchmarkSet build_background_variants(const std::vector<AnnotatedImage>& dataset,
                                       const std::vector<std::vector<Mask>>& masks,
                                       const std::vector<BackgroundRecord>& pool,
                                       int variants_per_image, uint64_t seed,
                                       const std::string& pool_root,
                                       const std::string& out_dir,
                                       const std::vector<std::string>& exclude_ids,
                                       int workers) {
  if (masks.size() != dataset.size()) {
    throw ConfigInvalidError("benchmark: need one mask list per image");
  }
  if (!exclude_ids.empty()) {
    std::unordered_set<std::string> excluded(exclude_ids.begin(), exclude_ids.end());
    for (const auto& rec : pool) {
      if (excluded.count(rec.id)) {
        throw PoolOverlapError("benchmark pool shares background " + rec.id +
                               " with the excluded manifest");
      }
    }
  }
  if (static_cast<int>(pool.size()) < variants_per_image) {
    throw PoolTooSmallError("benchmark: pool holds " + std::to_string(pool.size()) +
                            " records, need " + std::to_string(variants_per_image));
  }
  fs::create_directories(fs::path(out_dir) / "images");

  struct PerImage {
    std::vector<BenchmarkRecord> records;
    std::vector<std::pair<std::string, const AnnotatedImage*>> doc_entries;
    std::vector<AnnotatedImage> variants;  // keeps doc_entries pointers alive
  };
  std::vector<PerImage> results(dataset.size());

  parallel_for(dataset.size(), workers, [&](size_t i) {
    const AnnotatedImage& src = dataset[i];
    PerImage& slot = results[i];

    // Original first.
    const std::string orig_rel = "images/" + src.source_id + ".png";
    const fs::path orig_path = fs::path(out_dir) / orig_rel;
    if (!fs::exists(orig_path)) save_png(orig_path.string(), src.pixels);
    slot.records.push_back({src.source_id, "", orig_rel, "", "", 0, 0});
    slot.doc_entries.emplace_back(src.source_id, &src);

    // Variants: cutouts at their mask positions over sampled backgrounds.
    std::vector<std::pair<ObjectCutout, std::pair<int, int>>> cutouts;
    for (size_t a = 0; a < masks[i].size(); ++a) {
      const BBox box = mask_to_bbox(masks[i][a]);
      cutouts.emplace_back(
          extract_foreground(src.pixels, masks[i][a], src.annotations[a].category_id),
          std::make_pair(box.x, box.y));
    }
    Rng rng = Rng::for_stream(seed, "bench|" + src.source_id);
    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (int v = 0; v < variants_per_image; ++v) {
      const size_t swap_with = v + rng.uniform_below(order.size() - v);
      std::swap(order[v], order[swap_with]);
    }
    slot.variants.reserve(static_cast<size_t>(variants_per_image));
    for (int v = 0; v < variants_per_image; ++v) {
      const BackgroundRecord& rec = pool[order[v]];
      Image bg = load_image((fs::path(pool_root) / rec.image_path).string());
      bg = resize_bilinear(bg, src.pixels.width, src.pixels.height);
      AnnotatedImage variant;
      variant.pixels = composite(cutouts, bg);
      variant.annotations = src.annotations;
      const std::string id = src.source_id + "__bgv" + std::to_string(v);
      variant.source_id = id;
      const std::string rel = "images/" + id + ".png";
      const fs::path path = fs::path(out_dir) / rel;
      if (!fs::exists(path)) save_png(path.string(), variant.pixels);
      slot.variants.push_back(std::move(variant));
      slot.records.push_back({id, src.source_id, rel, rec.id, "", 0, 0});
      slot.doc_entries.emplace_back(id, &slot.variants.back());
    }
  });

  BenchmarkSet set;
  copy_categories(set.annotations, dataset);
  for (auto& slot : results) {
    for (auto& rec : slot.records) set.records.push_back(std::move(rec));
    for (auto& [id, img] : slot.doc_entries) {
      append_image_to_doc(set.annotations, *img, id, "images/" + id + ".png");
    }
  }
  return set;
}

BenchmarkSet build_corruption_set(const std::vector<AnnotatedImage>& dataset,
                                  const std::vector<int>& severities, uint64_t seed,
                                  const std::string& out_dir,
                                  const CorruptionTables& tables, int workers) {
  if (severities.empty()) throw ConfigInvalidError("benchmark: no severities requested");
  fs::create_directories(fs::path(out_dir) / "images");

  struct PerImage {
    std::vector<BenchmarkRecord> records;
    std::vector<std::pair<std::string, AnnotatedImage>> outputs;
  };
  std::vector<PerImage> results(dataset.size());

  parallel_for(dataset.size(), workers, [&](size_t i) {
    const AnnotatedImage& src = dataset[i];
    PerImage& slot = results[i];
    for (CorruptionKind kind : all_corruption_kinds()) {
      for (int severity : severities) {
        CorruptionSpec spec;
        spec.kind = kind;
        spec.severity = severity;
        spec.seed = seed ^ fnv1a64(src.source_id + "|" + corruption_name(kind) + "|" +
                                   std::to_string(severity));
        const std::string id =
            src.source_id + "__" + corruption_name(kind) + "_s" + std::to_string(severity);
        const std::string rel = "images/" + id + ".png";
        const fs::path path = fs::path(out_dir) / rel;
        AnnotatedImage out;
        out.pixels = corrupt(src.pixels, spec, tables);
        out.annotations = src.annotations;
        out.source_id = id;
        if (!fs::exists(path)) save_png(path.string(), out.pixels);
        slot.records.push_back(
            {id, src.source_id, rel, "", corruption_name(kind), severity, spec.seed});
        slot.outputs.emplace_back(id, std::move(out));
      }
    }
  });

  BenchmarkSet set;
  copy_categories(set.annotations, dataset);
  for (auto& slot : results) {
    for (auto& rec : slot.records) set.records.push_back(std::move(rec));
    for (auto& [id, img] : slot.outputs) {
      append_image_to_doc(set.annotations, img, id, "images/" + id + ".png");
    }
  }
  return set;
}

void save_benchmark_index(const std::string& path,
                          const std::vector<BenchmarkRecord>& records,
                          const std::string& provenance_json) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailureError("cannot open for writing: " + path);
  if (!provenance_json.empty()) {
    out << json{{"provenance", json::parse(provenance_json)}}.dump() << "\n";
  }
  for (const auto& rec : records) {
    json j = {{"id", rec.id}, {"path", rec.path}};
    if (!rec.variant_of.empty()) j["variant_of"] = rec.variant_of;
    if (!rec.background_id.empty()) j["background_id"] = rec.background_id;
    if (!rec.corruption.empty()) {
      j["corruption"] = rec.corruption;
      j["severity"] = rec.severity;
      j["seed"] = rec.seed;
    }
    out << j.dump() << "\n";
  }
}

std::vector<BenchmarkRecord> load_benchmark_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailureError("cannot open benchmark index: " + path);
  std::vector<BenchmarkRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.contains("provenance")) continue;
    BenchmarkRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.path = j.at("path").get<std::string>();
    if (j.contains("variant_of")) rec.variant_of = j["variant_of"].get<std::string>();
    if (j.contains("background_id")) rec.background_id = j["background_id"].get<std::string>();
    if (j.contains("corruption")) {
      rec.corruption = j["corruption"].get<std::string>();
      rec.severity = j["severity"].get<int>();
      rec.seed = j["seed"].get<uint64_t>();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ccl
