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

#include "ccl/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ccl/errors.hpp"
#include "ccl/image_io.hpp"
#include "ccl/parallel.hpp"
#include "ccl/rng.hpp"
#include "ccl/version.hpp"

namespace ccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string resolve_images_root(const PipelineConfig& cfg) {
  if (!cfg.images_root.empty()) return cfg.images_root;
  return fs::path(cfg.annotations_path).parent_path().string();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigInvalidError(message);
}

std::vector<std::string> load_ids_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailureError("cannot open ids file: " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ids.push_back(line);
  }
  return ids;
}

// Restricts a document to the listed image ids, keeping document order.
AnnotationDoc filter_doc(const AnnotationDoc& doc, const std::vector<std::string>& ids) {
  std::unordered_set<std::string> keep(ids.begin(), ids.end());
  AnnotationDoc out;
  out.categories = doc.categories;
  for (const auto& img : doc.images) {
    if (keep.count(img.id)) out.images.push_back(img);
  }
  for (const auto& ann : doc.annotations) {
    if (keep.count(ann.image_id)) out.annotations.push_back(ann);
  }
  return out;
}

std::vector<Mask> load_image_masks(const AnnotatedImage& img, const std::string& masks_dir) {
  std::vector<Mask> masks;
  for (const auto& ann : img.annotations) {
    const fs::path path = fs::path(masks_dir) / ann.mask_ref;
    Mask m = load_mask(path.string());
    if (m.width != img.pixels.width || m.height != img.pixels.height) {
      throw ConfigInvalidError("mask dims mismatch: " + path.string());
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

std::unique_ptr<GenBackend> make_backend(const PipelineConfig& cfg) {
  if (cfg.bg.backend == "stub") return std::make_unique<StubBackend>();
  if (cfg.bg.backend == "http") {
    require(!cfg.bg.endpoint.empty(), "http backend needs an endpoint url");
    return std::make_unique<HttpBackend>(cfg.bg.endpoint);
  }
  throw ConfigInvalidError("unknown backend: " + cfg.bg.backend);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailureError("cannot open for writing: " + path);
  out << content;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailureError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("config: invalid JSON: " + std::string(e.what()));
  }
  PipelineConfig cfg;
  try {
    if (j.contains("seed")) {
      cfg.seed = j["seed"].get<uint64_t>();
      cfg.seed_set = true;
    }
    if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      if (p.contains("annotations")) cfg.annotations_path = p["annotations"].get<std::string>();
      if (p.contains("images_root")) cfg.images_root = p["images_root"].get<std::string>();
      if (p.contains("masks_dir")) cfg.masks_dir = p["masks_dir"].get<std::string>();
      if (p.contains("background_manifest")) {
        cfg.background_manifest = p["background_manifest"].get<std::string>();
      }
      if (p.contains("ids_file")) cfg.ids_file = p["ids_file"].get<std::string>();
    }
    if (j.contains("augment")) {
      const auto& a = j["augment"];
      if (a.contains("n_positions")) cfg.augment.n_positions = a["n_positions"].get<int>();
      if (a.contains("alpha")) cfg.augment.alpha = a["alpha"].get<double>();
      if (a.contains("n_r")) cfg.augment.n_r = a["n_r"].get<int>();
      if (a.contains("min_free_positions")) {
        cfg.augment.min_free_positions = a["min_free_positions"].get<int>();
      }
      if (a.contains("repeat")) cfg.augment_repeat = a["repeat"].get<int>();
    }
    if (j.contains("quality_filter")) {
      const auto& q = j["quality_filter"];
      if (q.contains("t_iou")) cfg.filter.t_iou = q["t_iou"].get<double>();
      if (q.contains("erode")) cfg.filter.erode = q["erode"].get<bool>();
    }
    if (j.contains("replace")) {
      const auto& r = j["replace"];
      if (r.contains("k_variants")) cfg.k_variants = r["k_variants"].get<int>();
      if (r.contains("include_original")) cfg.include_original = r["include_original"].get<bool>();
    }
    if (j.contains("loss")) {
      const auto& l = j["loss"];
      if (l.contains("tau")) cfg.loss.tau = l["tau"].get<double>();
      if (l.contains("lambda_i")) cfg.loss.lambda_i = l["lambda_i"].get<double>();
      if (l.contains("lambda_t")) cfg.loss.lambda_t = l["lambda_t"].get<double>();
      if (l.contains("prenormalize")) cfg.loss.prenormalize = l["prenormalize"].get<bool>();
    }
    if (j.contains("background")) {
      const auto& b = j["background"];
      if (b.contains("themes")) {
        cfg.bg.prompts_per_theme.clear();
        for (const auto& [name, count] : b["themes"].items()) {
          cfg.bg.prompts_per_theme.emplace_back(theme_from_name(name), count.get<int>());
        }
        std::sort(cfg.bg.prompts_per_theme.begin(), cfg.bg.prompts_per_theme.end(),
                  [](const auto& a, const auto& b2) {
                    return theme_name(a.first) < theme_name(b2.first);
                  });
      }
      if (b.contains("seeds_per_prompt")) cfg.bg.seeds_per_prompt = b["seeds_per_prompt"].get<int>();
      if (b.contains("width")) cfg.bg.width = b["width"].get<int>();
      if (b.contains("height")) cfg.bg.height = b["height"].get<int>();
      if (b.contains("backend")) cfg.bg.backend = b["backend"].get<std::string>();
      if (b.contains("endpoint")) cfg.bg.endpoint = b["endpoint"].get<std::string>();
      if (b.contains("expander")) cfg.bg.expander = b["expander"].get<std::string>();
      if (b.contains("expander_endpoint")) {
        cfg.bg.expander_endpoint = b["expander_endpoint"].get<std::string>();
      }
    }
    if (j.contains("bench")) {
      const auto& b = j["bench"];
      if (b.contains("mode")) cfg.bench_mode = b["mode"].get<std::string>();
      if (b.contains("variants_per_image")) {
        cfg.variants_per_image = b["variants_per_image"].get<int>();
      }
      if (b.contains("severities")) cfg.severities = b["severities"].get<std::vector<int>>();
      if (b.contains("exclude_manifest")) {
        cfg.exclude_manifest = b["exclude_manifest"].get<std::string>();
      }
      if (b.contains("tables")) {
        const auto& t = b["tables"];
        auto read5 = [](const json& arr, std::array<double, 5>& out) {
          for (int i = 0; i < 5; ++i) out[i] = arr.at(i).get<double>();
        };
        if (t.contains("noise_sigma")) read5(t["noise_sigma"], cfg.corruption_tables.noise_sigma);
        if (t.contains("contrast_factor")) {
          read5(t["contrast_factor"], cfg.corruption_tables.contrast_factor);
        }
        if (t.contains("saturation_factor")) {
          read5(t["saturation_factor"], cfg.corruption_tables.saturation_factor);
        }
        if (t.contains("lighting_offset")) {
          read5(t["lighting_offset"], cfg.corruption_tables.lighting_offset);
        }
      }
    }
    if (j.contains("select")) {
      const auto& s = j["select"];
      if (s.contains("budget") && !s["budget"].is_null()) cfg.budget = s["budget"].get<int>();
      if (s.contains("reduction_factor") && !s["reduction_factor"].is_null()) {
        cfg.reduction_factor = s["reduction_factor"].get<double>();
      }
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      if (e.contains("iou_thresholds")) {
        cfg.iou_thresholds = e["iou_thresholds"].get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigInvalidError("config: schema error: " + std::string(e.what()));
  }
  return cfg;
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* url = std::getenv("CCL_BACKEND_URL"); url && *url) {
    cfg.bg.backend = "http";
    cfg.bg.endpoint = url;
  }
}

uint64_t config_digest(const PipelineConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["augment"] = {{"n_positions", cfg.augment.n_positions},
                  {"alpha", cfg.augment.alpha},
                  {"n_r", cfg.augment.n_r},
                  {"min_free_positions", cfg.augment.min_free_positions},
                  {"repeat", cfg.augment_repeat}};
  j["quality_filter"] = {{"t_iou", cfg.filter.t_iou}, {"erode", cfg.filter.erode}};
  j["replace"] = {{"k_variants", cfg.k_variants},
                  {"include_original", cfg.include_original}};
  j["loss"] = {{"tau", cfg.loss.tau},
               {"lambda_i", cfg.loss.lambda_i},
               {"lambda_t", cfg.loss.lambda_t},
               {"prenormalize", cfg.loss.prenormalize}};
  json themes = json::object();
  for (const auto& [theme, count] : cfg.bg.prompts_per_theme) {
    themes[theme_name(theme)] = count;
  }
  j["background"] = {{"themes", themes},
                     {"seeds_per_prompt", cfg.bg.seeds_per_prompt},
                     {"width", cfg.bg.width},
                     {"height", cfg.bg.height},
                     {"backend", cfg.bg.backend},
                     {"expander", cfg.bg.expander}};
  j["bench"] = {{"mode", cfg.bench_mode},
                {"variants_per_image", cfg.variants_per_image},
                {"severities", cfg.severities}};
  if (cfg.budget) j["select"]["budget"] = *cfg.budget;
  if (cfg.reduction_factor) j["select"]["reduction_factor"] = *cfg.reduction_factor;
  j["eval"] = {{"iou_thresholds", cfg.iou_thresholds}};
  return fnv1a64(j.dump());
}

std::string provenance_json(const PipelineConfig& cfg) {
  json j = {{"tool", kToolName},
            {"version", kToolVersion},
            {"seed", cfg.seed},
            {"config_digest", hex64(config_digest(cfg))}};
  return j.dump();
}

CommandCounts cmd_select(const PipelineConfig& cfg) {
  require(cfg.seed_set, "select: seed is mandatory");
  require(!cfg.out_dir.empty(), "select: out dir required");
  const AnnotationDoc doc = load_annotation_doc(cfg.annotations_path);
  const DatasetIndex index = index_from_doc(doc);
  SelectionParams params;
  params.budget = cfg.budget;
  params.reduction_factor = cfg.reduction_factor;
  const auto selected = select_subset(index, params);

  fs::create_directories(cfg.out_dir);
  std::ostringstream body;
  body << "# provenance: " << provenance_json(cfg) << "\n";
  for (const auto& id : selected) body << id << "\n";
  write_text_file((fs::path(cfg.out_dir) / "selected_ids.txt").string(), body.str());

  CommandCounts counts;
  counts.processed = static_cast<int>(index.entries.size());
  counts.written = static_cast<int>(selected.size());
  return counts;
}

CommandCounts cmd_augment(const PipelineConfig& cfg) {
  require(cfg.seed_set, "augment: seed is mandatory");
  require(!cfg.out_dir.empty(), "augment: out dir required");
  require(!cfg.masks_dir.empty(), "augment: masks dir required");
  AnnotationDoc doc = load_annotation_doc(cfg.annotations_path);
  if (!cfg.ids_file.empty()) doc = filter_doc(doc, load_ids_file(cfg.ids_file));
  const std::string images_root = resolve_images_root(cfg);

  // Donor pool: every annotation with a readable mask, document order.
  std::vector<AnnotatedImage> sources;
  sources.reserve(doc.images.size());
  for (const auto& entry : doc.images) {
    sources.push_back(assemble_annotated_image(doc, entry, images_root));
  }
  std::vector<ObjectCutout> donor_pool;
  for (const auto& src : sources) {
    for (size_t a = 0; a < src.annotations.size(); ++a) {
      const fs::path mask_path = fs::path(cfg.masks_dir) / src.annotations[a].mask_ref;
      if (!fs::exists(mask_path)) continue;
      const Mask m = load_mask(mask_path.string());
      if (m.width != src.pixels.width || m.height != src.pixels.height) continue;
      if (m.count() == 0) continue;
      donor_pool.push_back(
          extract_foreground(src.pixels, m, src.annotations[a].category_id));
    }
  }
  if (donor_pool.empty()) {
    throw EmptyDonorPoolError("augment: no donor cutouts could be extracted");
  }

  const fs::path out_images = fs::path(cfg.out_dir) / "images";
  const fs::path out_masks = fs::path(cfg.out_dir) / "masks";
  fs::create_directories(out_images);
  fs::create_directories(out_masks);

  struct Slot {
    AnnotatedImage result;
    std::vector<std::pair<ObjectCutout, std::pair<int, int>>> inserted;
    int augmented = 0;
    bool skipped = false;
  };
  std::vector<Slot> slots(sources.size());

  parallel_for(sources.size(), cfg.workers, [&](size_t i) {
    AnnotatedImage work = sources[i];
    Slot& slot = slots[i];
    for (int rep = 0; rep < cfg.augment_repeat; ++rep) {
      AugmentParams params = cfg.augment;
      params.seed = cfg.seed + static_cast<uint64_t>(rep);
      AugmentOutcome outcome;
      try {
        outcome = categorical_augment(work, donor_pool, params);
      } catch (const EmptyDonorPoolError&) {
        slot.skipped = true;  // image already holds every donor category
        break;
      }
      if (outcome.augmented()) {
        work = std::move(*outcome.image);
        slot.inserted.emplace_back(std::move(*outcome.placed), outcome.position);
        slot.augmented += 1;
      } else {
        slot.skipped = true;
        break;
      }
    }
    slot.result = std::move(work);

    // Persist raster and one mask file per annotation. Pre-existing masks
    // are byte-copied; an inserted object's mask is its cutout alpha.
    const AnnotatedImage& out = slot.result;
    save_png((out_images / (out.source_id + ".png")).string(), out.pixels);
    const size_t original_count = sources[i].annotations.size();
    for (size_t a = 0; a < out.annotations.size(); ++a) {
      const std::string mask_name = out.source_id + "_" + std::to_string(a) + ".png";
      const fs::path dst = out_masks / mask_name;
      if (a < original_count) {
        const fs::path src_mask = fs::path(cfg.masks_dir) / out.annotations[a].mask_ref;
        if (fs::exists(src_mask)) {
          write_binary_file(dst.string(), read_binary_file(src_mask.string()));
        } else {
          // No mask supplied: fall back to the full annotation box.
          Mask m = Mask::make(out.pixels.width, out.pixels.height);
          const BBox& b = out.annotations[a].bbox;
          for (int y = b.y; y < b.y2(); ++y) {
            for (int x = b.x; x < b.x2(); ++x) m.set(x, y, true);
          }
          save_mask(dst.string(), m);
        }
      } else {
        const auto& [cutout, pos] = slot.inserted[a - original_count];
        Mask m = Mask::make(out.pixels.width, out.pixels.height);
        for (int y = 0; y < cutout.native_h(); ++y) {
          for (int x = 0; x < cutout.native_w(); ++x) {
            if (cutout.pixels.at(x, y, 3) == 255) {
              m.set(pos.first + x, pos.second + y, true);
            }
          }
        }
        save_mask(dst.string(), m);
      }
    }
  });

  AnnotationDoc out_doc;
  out_doc.categories = doc.categories;
  CommandCounts counts;
  for (const auto& slot : slots) {
    const AnnotatedImage& img = slot.result;
    out_doc.images.push_back({img.source_id, "images/" + img.source_id + ".png",
                              img.pixels.width, img.pixels.height});
    for (const auto& ann : img.annotations) {
      AnnotationRecord rec;
      rec.image_id = img.source_id;
      rec.bbox = ann.bbox;
      rec.category_id = ann.category_id;
      rec.description = ann.description;
      rec.description_type = ann.description_type;
      out_doc.annotations.push_back(std::move(rec));
    }
    counts.processed += 1;
    counts.augmented += slot.augmented > 0 ? 1 : 0;
    counts.skipped += slot.skipped ? 1 : 0;
    counts.written += 1;
  }
  save_annotation_doc((fs::path(cfg.out_dir) / "annotations.json").string(), out_doc,
                      provenance_json(cfg));
  return counts;
}

CommandCounts cmd_genbg(const PipelineConfig& cfg) {
  require(cfg.seed_set, "gen-bg: seed is mandatory");
  require(!cfg.out_dir.empty(), "gen-bg: out dir required");
  BackgroundSetConfig bsc;
  bsc.prompts_per_theme = cfg.bg.prompts_per_theme;
  bsc.seeds_per_prompt = cfg.bg.seeds_per_prompt;
  bsc.width = cfg.bg.width;
  bsc.height = cfg.bg.height;
  bsc.seed = cfg.seed;
  bsc.expander = cfg.bg.expander == "llm-endpoint" ? PromptExpander::llm_endpoint
                                                   : PromptExpander::static_corpus;
  bsc.expander_endpoint = cfg.bg.expander_endpoint;
  bsc.out_dir = cfg.out_dir;
  bsc.provenance_json = provenance_json(cfg);
  auto backend = make_backend(cfg);
  const BackgroundSetResult result = build_background_set(bsc, *backend);
  CommandCounts counts;
  counts.processed = static_cast<int>(result.records.size());
  counts.written = result.newly_generated;
  return counts;
}

CommandCounts cmd_replace(const PipelineConfig& cfg) {
  require(cfg.seed_set, "replace: seed is mandatory");
  require(!cfg.out_dir.empty(), "replace: out dir required");
  require(!cfg.masks_dir.empty(), "replace: masks dir required");
  require(!cfg.background_manifest.empty(), "replace: background manifest required");
  AnnotationDoc doc = load_annotation_doc(cfg.annotations_path);
  if (!cfg.ids_file.empty()) doc = filter_doc(doc, load_ids_file(cfg.ids_file));
  const std::string images_root = resolve_images_root(cfg);
  const auto pool = load_background_manifest(cfg.background_manifest);
  const std::string pool_root = fs::path(cfg.background_manifest).parent_path().string();

  const fs::path out_images = fs::path(cfg.out_dir) / "images";
  fs::create_directories(out_images);

  struct Slot {
    json group;
    json rejected;
    std::vector<std::pair<std::string, AnnotatedImage>> outputs;
  };
  std::vector<Slot> slots(doc.images.size());

  parallel_for(doc.images.size(), cfg.workers, [&](size_t i) {
    Slot& slot = slots[i];
    const AnnotatedImage img = assemble_annotated_image(doc, doc.images[i], images_root);
    const std::vector<Mask> masks = load_image_masks(img, cfg.masks_dir);
    ExpandResult res =
        expand_image(img, masks, pool, cfg.k_variants, cfg.filter, cfg.seed, pool_root);
    if (!res.accepted()) {
      slot.rejected = json{{"source_id", img.source_id},
                           {"reason", res.reject_reason},
                           {"mask_ious", res.mask_ious}};
      return;
    }
    VariantGroup& group = *res.group;
    json variant_paths = json::array();
    for (size_t v = 0; v < group.variants.size(); ++v) {
      const std::string id = img.source_id + "__" + group.background_ids[v];
      const std::string rel = "images/" + id + ".png";
      const fs::path path = fs::path(cfg.out_dir) / rel;
      if (!fs::exists(path)) save_png(path.string(), group.variants[v].pixels);
      variant_paths.push_back(rel);
      slot.outputs.emplace_back(id, std::move(group.variants[v]));
    }
    slot.group = json{{"source_id", img.source_id},
                      {"variants", variant_paths},
                      {"background_ids", group.background_ids}};
    if (cfg.include_original) {
      const std::string rel = "images/" + img.source_id + ".png";
      const fs::path path = fs::path(cfg.out_dir) / rel;
      if (!fs::exists(path)) save_png(path.string(), img.pixels);
      slot.group["original"] = rel;
      slot.outputs.emplace_back(img.source_id, img);
    }
  });

  // Single-writer manifests, input order.
  std::ostringstream groups, rejects;
  groups << json{{"provenance", json::parse(provenance_json(cfg))}}.dump() << "\n";
  AnnotationDoc out_doc;
  out_doc.categories = doc.categories;
  CommandCounts counts;
  for (auto& slot : slots) {
    counts.processed += 1;
    if (!slot.rejected.is_null()) {
      rejects << slot.rejected.dump() << "\n";
      counts.rejected += 1;
      continue;
    }
    groups << slot.group.dump() << "\n";
    for (auto& [id, img] : slot.outputs) {
      out_doc.images.push_back(
          {id, "images/" + id + ".png", img.pixels.width, img.pixels.height});
      for (const auto& ann : img.annotations) {
        AnnotationRecord rec;
        rec.image_id = id;
        rec.bbox = ann.bbox;
        rec.category_id = ann.category_id;
        rec.description = ann.description;
        rec.description_type = ann.description_type;
        out_doc.annotations.push_back(std::move(rec));
      }
      counts.written += 1;
    }
  }
  write_text_file((fs::path(cfg.out_dir) / "groups.jsonl").string(), groups.str());
  write_text_file((fs::path(cfg.out_dir) / "rejected.jsonl").string(), rejects.str());
  save_annotation_doc((fs::path(cfg.out_dir) / "annotations.json").string(), out_doc,
                      provenance_json(cfg));
  return counts;
}

CommandCounts cmd_build_bench(const PipelineConfig& cfg) {
  require(cfg.seed_set, "build-bench: seed is mandatory");
  require(!cfg.out_dir.empty(), "build-bench: out dir required");
  AnnotationDoc doc = load_annotation_doc(cfg.annotations_path);
  if (!cfg.ids_file.empty()) doc = filter_doc(doc, load_ids_file(cfg.ids_file));
  const std::string images_root = resolve_images_root(cfg);

  std::vector<AnnotatedImage> dataset;
  dataset.reserve(doc.images.size());
  for (const auto& entry : doc.images) {
    dataset.push_back(assemble_annotated_image(doc, entry, images_root));
  }

  BenchmarkSet set;
  if (cfg.bench_mode == "background") {
    require(!cfg.masks_dir.empty(), "build-bench: masks dir required");
    require(!cfg.background_manifest.empty(), "build-bench: background manifest required");
    std::vector<std::vector<Mask>> masks;
    masks.reserve(dataset.size());
    for (const auto& img : dataset) masks.push_back(load_image_masks(img, cfg.masks_dir));
    const auto pool = load_background_manifest(cfg.background_manifest);
    const std::string pool_root =
        fs::path(cfg.background_manifest).parent_path().string();
    std::vector<std::string> exclude_ids;
    if (!cfg.exclude_manifest.empty()) {
      for (const auto& rec : load_background_manifest(cfg.exclude_manifest)) {
        exclude_ids.push_back(rec.id);
      }
    }
    set = build_background_variants(dataset, masks, pool, cfg.variants_per_image,
                                    cfg.seed, pool_root, cfg.out_dir, exclude_ids,
                                    cfg.workers);
  } else if (cfg.bench_mode == "corruption") {
    set = build_corruption_set(dataset, cfg.severities, cfg.seed, cfg.out_dir,
                               cfg.corruption_tables, cfg.workers);
  } else {
    throw ConfigInvalidError("build-bench: unknown mode " + cfg.bench_mode);
  }
  save_benchmark_index((fs::path(cfg.out_dir) / "index.jsonl").string(), set.records,
                       provenance_json(cfg));
  save_annotation_doc((fs::path(cfg.out_dir) / "annotations.json").string(),
                      set.annotations, provenance_json(cfg));
  CommandCounts counts;
  counts.processed = static_cast<int>(dataset.size());
  counts.written = static_cast<int>(set.records.size());
  return counts;
}

void cmd_corrupt_image(const PipelineConfig& cfg, const std::string& input_path,
                       CorruptionKind kind, int severity,
                       const std::string& output_path) {
  CorruptionSpec spec;
  spec.kind = kind;
  spec.severity = severity;
  spec.seed = cfg.seed;
  const Image img = load_image(input_path);
  save_png(output_path, corrupt(img, spec, cfg.corruption_tables));
}

EvalReport cmd_eval(const PipelineConfig& cfg, const std::string& predictions_path,
                    const std::vector<std::pair<std::string, std::string>>& corrupted_predictions,
                    const std::string& corrupted_gt_path) {
  require(!cfg.out_dir.empty(), "eval: out dir required");
  EvalSet es;
  es.ground_truth = load_annotation_doc(cfg.annotations_path);
  es.predictions = load_predictions(predictions_path);

  EvalReport report;
  for (Partition p : {Partition::full, Partition::presence, Partition::absence}) {
    try {
      report.ap[partition_name(p)] = evaluate_ap(es, cfg.iou_thresholds, p);
    } catch (const EmptyGroundTruthError&) {
      // Partition absent from this ground truth; leave it out of the report.
    }
  }

  if (!corrupted_predictions.empty()) {
    EvalSet ces;
    ces.ground_truth = corrupted_gt_path.empty()
                           ? es.ground_truth
                           : load_annotation_doc(corrupted_gt_path);
    std::vector<double> fulls;
    for (const auto& [label, path] : corrupted_predictions) {
      ces.predictions = load_predictions(path);
      const double full = evaluate_ap(ces, cfg.iou_thresholds, Partition::full);
      report.corrupted_full[label] = full;
      fulls.push_back(full);
    }
    report.mfull_value = mfull(fulls);
    if (report.ap.count("FULL")) {
      report.rfull_value = rfull(*report.mfull_value, report.ap["FULL"]);
    }
  }

  fs::create_directories(cfg.out_dir);
  json jm = {{"provenance", json::parse(provenance_json(cfg))}};
  for (const auto& [name, value] : report.ap) jm["ap"][name] = value;
  for (const auto& [name, value] : report.corrupted_full) {
    jm["corrupted_full"][name] = value;
  }
  if (report.mfull_value) jm["mfull"] = *report.mfull_value;
  if (report.rfull_value) jm["rfull"] = round1(*report.rfull_value);
  write_text_file((fs::path(cfg.out_dir) / "metrics.json").string(), jm.dump(2) + "\n");

  std::ostringstream table;
  table << "metric            value\n";
  table << "----------------  -------\n";
  char buf[64];
  for (const auto& [name, value] : report.ap) {
    std::snprintf(buf, sizeof buf, "AP %-13s %7.4f\n", name.c_str(), value);
    table << buf;
  }
  for (const auto& [name, value] : report.corrupted_full) {
    std::snprintf(buf, sizeof buf, "FULL %-11s %7.4f\n", name.c_str(), value);
    table << buf;
  }
  if (report.mfull_value) {
    std::snprintf(buf, sizeof buf, "mFULL            %7.4f\n", *report.mfull_value);
    table << buf;
  }
  if (report.rfull_value) {
    std::snprintf(buf, sizeof buf, "rFULL            %7.1f\n", round1(*report.rfull_value));
    table << buf;
  }
  write_text_file((fs::path(cfg.out_dir) / "metrics.txt").string(), table.str());
  return report;
}

LossReport cmd_loss(const PipelineConfig& cfg, const std::string& image_features_path,
                    const std::string& text_features_path) {
  FeatureBatch img = load_feature_batch(image_features_path);
  img.modality = Modality::image;
  LossReport report;
  report.image_loss = modality_consistency_loss(img, cfg.loss.tau, cfg.loss.prenormalize);
  std::optional<FeatureBatch> txt;
  if (!text_features_path.empty()) {
    txt = load_feature_batch(text_features_path);
    txt->modality = Modality::text;
    report.text_loss =
        modality_consistency_loss(*txt, cfg.loss.tau, cfg.loss.prenormalize);
  }
  report.consistency = consistency_loss(img, txt ? &*txt : nullptr, cfg.loss);
  return report;
}

GradCheckReport cmd_grad_check(const PipelineConfig& cfg,
                               const std::string& features_path, double h) {
  const FeatureBatch fb = load_feature_batch(features_path);
  GradCheckReport report;
  report.loss = modality_consistency_loss(fb, cfg.loss.tau, cfg.loss.prenormalize);
  const auto analytic = modality_consistency_grad(fb, cfg.loss.tau, cfg.loss.prenormalize);
  const auto fd = finite_difference_grad(fb, cfg.loss.tau, h, cfg.loss.prenormalize);
  report.max_relative_error = max_relative_grad_error(analytic, fd);
  return report;
}

}  // namespace ccl
