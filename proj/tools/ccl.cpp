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

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ccl/errors.hpp"
#include "ccl/pipeline.hpp"
#include "ccl/version.hpp"

namespace {

using ccl::PipelineConfig;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
};

// Layering: config file first, then flags on top.
PipelineConfig resolve_config(const GlobalArgs& g) {
  PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = ccl::load_pipeline_config(g.config_path);
  if (g.seed_given) {
    cfg.seed = g.seed;
    cfg.seed_set = true;
  }
  if (g.workers > 0) cfg.workers = g.workers;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  ccl::apply_env_overrides(cfg);
  return cfg;
}

void add_global_flags(CLI::App* cmd, GlobalArgs& g) {
  cmd->add_option("--config", g.config_path, "JSON config file");
  cmd->add_option("--out", g.out_dir, "output directory");
  cmd->add_option("--seed", g.seed, "master 64-bit seed")
      ->each([&g](const std::string&) { g.seed_given = true; });
  cmd->add_option("--workers", g.workers, "worker threads (1 = serial)");
}

void print_counts(const char* verb, const ccl::CommandCounts& c) {
  std::printf("%s: processed=%d augmented=%d skipped=%d rejected=%d written=%d\n",
              verb, c.processed, c.augmented, c.skipped, c.rejected, c.written);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contextual-consistency dataset synthesis and robustness evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ccl::kToolVersion));

  GlobalArgs g;

  // select
  auto* sel = app.add_subcommand("select", "coverage-first subset selection");
  add_global_flags(sel, g);
  std::string sel_annotations;
  int sel_budget = 0;
  double sel_reduction = 0.0;
  sel->add_option("--annotations", sel_annotations, "annotation document")->required();
  sel->add_option("--budget", sel_budget, "number of images to keep");
  sel->add_option("--reduction-factor", sel_reduction, "fraction of images to keep");

  // augment
  auto* aug = app.add_subcommand("augment", "insert donor objects from other categories");
  add_global_flags(aug, g);
  std::string aug_annotations, aug_masks, aug_images_root, aug_ids;
  int aug_repeat = 0;
  aug->add_option("--annotations", aug_annotations, "annotation document")->required();
  aug->add_option("--masks", aug_masks, "mask directory")->required();
  aug->add_option("--images-root", aug_images_root, "image root directory");
  aug->add_option("--ids", aug_ids, "selected-ids file restricting the corpus");
  aug->add_option("--repeat", aug_repeat, "donor insertions per image");

  // gen-bg
  auto* gen = app.add_subcommand("gen-bg", "build the background pool");
  add_global_flags(gen, g);
  int gen_prompts = 0, gen_seeds = 0, gen_size = 0;
  std::string gen_backend, gen_endpoint, gen_expander, gen_expander_endpoint;
  gen->add_option("--prompts-per-theme", gen_prompts, "prompt count for each theme");
  gen->add_option("--seeds-per-prompt", gen_seeds, "images per prompt");
  gen->add_option("--size", gen_size, "square canvas size in pixels");
  gen->add_option("--backend", gen_backend, "stub | http");
  gen->add_option("--endpoint", gen_endpoint, "generation endpoint url");
  gen->add_option("--expander", gen_expander, "static-corpus | llm-endpoint");
  gen->add_option("--expander-endpoint", gen_expander_endpoint, "prompt endpoint url");

  // replace
  auto* rep = app.add_subcommand("replace", "composite foregrounds onto pool backgrounds");
  add_global_flags(rep, g);
  std::string rep_annotations, rep_masks, rep_images_root, rep_manifest, rep_ids;
  int rep_k = 0;
  bool rep_no_original = false, rep_erode = false;
  double rep_tiou = -1.0;
  rep->add_option("--annotations", rep_annotations, "annotation document")->required();
  rep->add_option("--masks", rep_masks, "mask directory")->required();
  rep->add_option("--images-root", rep_images_root, "image root directory");
  rep->add_option("--backgrounds", rep_manifest, "background manifest")->required();
  rep->add_option("--ids", rep_ids, "selected-ids file restricting the corpus");
  rep->add_option("--k", rep_k, "variants per image");
  rep->add_option("--t-iou", rep_tiou, "mask quality threshold");
  rep->add_flag("--erode", rep_erode, "erode masks by one pixel before extraction");
  rep->add_flag("--no-include-original", rep_no_original,
                "emit only replaced variants, not the source image");

  // build-bench
  auto* bench = app.add_subcommand("build-bench", "build a robustness benchmark");
  add_global_flags(bench, g);
  std::string bench_annotations, bench_masks, bench_images_root, bench_manifest;
  std::string bench_mode, bench_exclude, bench_ids;
  int bench_variants = 0;
  bool bench_all_severities = false;
  bench->add_option("--annotations", bench_annotations, "annotation document")->required();
  bench->add_option("--mode", bench_mode, "background | corruption");
  bench->add_option("--masks", bench_masks, "mask directory (background mode)");
  bench->add_option("--images-root", bench_images_root, "image root directory");
  bench->add_option("--backgrounds", bench_manifest, "background manifest (background mode)");
  bench->add_option("--exclude", bench_exclude, "manifest whose backgrounds must not appear");
  bench->add_option("--ids", bench_ids, "selected-ids file restricting the corpus");
  bench->add_option("--variants", bench_variants, "background variants per image");
  bench->add_flag("--all-severities", bench_all_severities,
                  "corrupt at severities 1..5 instead of 3 only");

  // corrupt
  auto* cor = app.add_subcommand("corrupt", "corrupt a single image");
  add_global_flags(cor, g);
  std::string cor_in, cor_out, cor_kind;
  int cor_severity = 3;
  cor->add_option("--in", cor_in, "input image")->required();
  cor->add_option("--out-file", cor_out, "output png")->required();
  cor->add_option("--kind", cor_kind, "gaussian_noise | contrast | saturation | lighting")
      ->required();
  cor->add_option("--severity", cor_severity, "severity 1..5");

  // eval
  auto* ev = app.add_subcommand("eval", "AP / robustness metrics");
  add_global_flags(ev, g);
  std::string ev_gt, ev_pred, ev_gt_corrupt;
  std::vector<std::string> ev_pred_corrupt;
  ev->add_option("--gt", ev_gt, "ground-truth annotation document")->required();
  ev->add_option("--pred", ev_pred, "predictions JSON")->required();
  ev->add_option("--pred-corrupt", ev_pred_corrupt,
                 "label=path predictions for one corruption (repeatable)");
  ev->add_option("--gt-corrupt", ev_gt_corrupt,
                 "annotation document for the corrupted predictions");

  // loss
  auto* lo = app.add_subcommand("loss", "consistency loss over feature batches");
  add_global_flags(lo, g);
  std::string lo_image, lo_text;
  double lo_tau = -1.0, lo_li = -1.0, lo_lt = -1.0;
  bool lo_prenorm = false;
  lo->add_option("--image-features", lo_image, "image feature batch file")->required();
  lo->add_option("--text-features", lo_text, "text feature batch file");
  lo->add_option("--tau", lo_tau, "softmax temperature");
  lo->add_option("--lambda-i", lo_li, "image loss weight");
  lo->add_option("--lambda-t", lo_lt, "text loss weight");
  lo->add_flag("--prenormalize", lo_prenorm, "L2-normalize features before the loss");

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "finite-difference gradient verification");
  add_global_flags(gc, g);
  std::string gc_features;
  double gc_h = 1e-4, gc_tau = -1.0;
  bool gc_prenorm = false;
  gc->add_option("--features", gc_features, "feature batch file")->required();
  gc->add_option("--step", gc_h, "finite difference step");
  gc->add_option("--tau", gc_tau, "softmax temperature");
  gc->add_flag("--prenormalize", gc_prenorm, "L2-normalize features before the loss");

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg = resolve_config(g);

    if (sel->parsed()) {
      cfg.annotations_path = sel_annotations;
      if (sel_budget > 0) cfg.budget = sel_budget;
      if (sel_reduction > 0.0) cfg.reduction_factor = sel_reduction;
      print_counts("select", ccl::cmd_select(cfg));
    } else if (aug->parsed()) {
      cfg.annotations_path = aug_annotations;
      cfg.masks_dir = aug_masks;
      if (!aug_images_root.empty()) cfg.images_root = aug_images_root;
      if (!aug_ids.empty()) cfg.ids_file = aug_ids;
      if (aug_repeat > 0) cfg.augment_repeat = aug_repeat;
      print_counts("augment", ccl::cmd_augment(cfg));
    } else if (gen->parsed()) {
      if (gen_prompts > 0) {
        for (auto& [theme, count] : cfg.bg.prompts_per_theme) count = gen_prompts;
      }
      if (gen_seeds > 0) cfg.bg.seeds_per_prompt = gen_seeds;
      if (gen_size > 0) {
        cfg.bg.width = gen_size;
        cfg.bg.height = gen_size;
      }
      if (!gen_backend.empty()) cfg.bg.backend = gen_backend;
      if (!gen_endpoint.empty()) cfg.bg.endpoint = gen_endpoint;
      if (!gen_expander.empty()) cfg.bg.expander = gen_expander;
      if (!gen_expander_endpoint.empty()) cfg.bg.expander_endpoint = gen_expander_endpoint;
      print_counts("gen-bg", ccl::cmd_genbg(cfg));
    } else if (rep->parsed()) {
      cfg.annotations_path = rep_annotations;
      cfg.masks_dir = rep_masks;
      cfg.background_manifest = rep_manifest;
      if (!rep_images_root.empty()) cfg.images_root = rep_images_root;
      if (!rep_ids.empty()) cfg.ids_file = rep_ids;
      if (rep_k > 0) cfg.k_variants = rep_k;
      if (rep_tiou >= 0.0) cfg.filter.t_iou = rep_tiou;
      if (rep_erode) cfg.filter.erode = true;
      if (rep_no_original) cfg.include_original = false;
      print_counts("replace", ccl::cmd_replace(cfg));
    } else if (bench->parsed()) {
      cfg.annotations_path = bench_annotations;
      if (!bench_mode.empty()) cfg.bench_mode = bench_mode;
      if (!bench_masks.empty()) cfg.masks_dir = bench_masks;
      if (!bench_images_root.empty()) cfg.images_root = bench_images_root;
      if (!bench_manifest.empty()) cfg.background_manifest = bench_manifest;
      if (!bench_exclude.empty()) cfg.exclude_manifest = bench_exclude;
      if (!bench_ids.empty()) cfg.ids_file = bench_ids;
      if (bench_variants > 0) cfg.variants_per_image = bench_variants;
      if (bench_all_severities) cfg.severities = {1, 2, 3, 4, 5};
      print_counts("build-bench", ccl::cmd_build_bench(cfg));
    } else if (cor->parsed()) {
      if (!cfg.seed_set) {
        cfg.seed = 0;
        cfg.seed_set = true;
      }
      ccl::cmd_corrupt_image(cfg, cor_in, ccl::corruption_from_name(cor_kind),
                             cor_severity, cor_out);
      std::printf("corrupt: wrote %s\n", cor_out.c_str());
    } else if (ev->parsed()) {
      cfg.annotations_path = ev_gt;
      std::vector<std::pair<std::string, std::string>> corrupt_preds;
      for (const auto& spec : ev_pred_corrupt) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
          throw ccl::ConfigInvalidError("--pred-corrupt expects label=path: " + spec);
        }
        corrupt_preds.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
      }
      const auto report = ccl::cmd_eval(cfg, ev_pred, corrupt_preds, ev_gt_corrupt);
      nlohmann::json out;
      for (const auto& [name, v] : report.ap) out["ap"][name] = v;
      for (const auto& [name, v] : report.corrupted_full) out["corrupted_full"][name] = v;
      if (report.mfull_value) out["mfull"] = *report.mfull_value;
      if (report.rfull_value) out["rfull"] = ccl::round1(*report.rfull_value);
      std::cout << out.dump(2) << "\n";
    } else if (lo->parsed()) {
      if (lo_tau > 0.0) cfg.loss.tau = lo_tau;
      if (lo_li >= 0.0) cfg.loss.lambda_i = lo_li;
      if (lo_lt >= 0.0) cfg.loss.lambda_t = lo_lt;
      if (lo_prenorm) cfg.loss.prenormalize = true;
      const auto report = ccl::cmd_loss(cfg, lo_image, lo_text);
      nlohmann::json out = {{"image_loss", report.image_loss},
                            {"consistency_loss", report.consistency}};
      if (report.text_loss) out["text_loss"] = *report.text_loss;
      std::cout << out.dump(2) << "\n";
    } else if (gc->parsed()) {
      if (gc_tau > 0.0) cfg.loss.tau = gc_tau;
      if (gc_prenorm) cfg.loss.prenormalize = true;
      const auto report = ccl::cmd_grad_check(cfg, gc_features, gc_h);
      nlohmann::json out = {{"loss", report.loss},
                            {"max_relative_error", report.max_relative_error}};
      std::cout << out.dump(2) << "\n";
    }
  } catch (const ccl::PartialFailureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& p : e.failed_prompts) std::cerr << "  failed: " << p << "\n";
    return 1;
  } catch (const ccl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
