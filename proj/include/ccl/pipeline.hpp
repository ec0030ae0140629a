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

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccl/augment.hpp"
#include "ccl/background.hpp"
#include "ccl/benchmark.hpp"
#include "ccl/eval.hpp"
#include "ccl/loss.hpp"
#include "ccl/replacement.hpp"
#include "ccl/select.hpp"

namespace ccl {

// Whole-pipeline configuration. A JSON config file populates it; CLI flags
// override individual keys afterwards.
struct PipelineConfig {
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
  std::string out_dir;

  std::string annotations_path;
  std::string images_root;  // defaults to the annotation file's directory
  std::string masks_dir;
  std::string background_manifest;
  std::string ids_file;  // optional subset filter

  AugmentParams augment;
  int augment_repeat = 1;

  QualityFilterParams filter;
  int k_variants = 4;
  bool include_original = true;

  LossConfig loss;

  struct BgGen {
    std::vector<std::pair<Theme, int>> prompts_per_theme = {
        {Theme::seasonal, 2}, {Theme::sky, 2}, {Theme::natural_landscape, 2}};
    int seeds_per_prompt = 11;
    int width = 512;
    int height = 512;
    std::string backend = "stub";  // stub | http
    std::string endpoint;
    std::string expander = "static-corpus";  // static-corpus | llm-endpoint
    std::string expander_endpoint;
  } bg;

  std::string bench_mode = "background";  // background | corruption
  int variants_per_image = 3;
  std::vector<int> severities = {3};
  std::string exclude_manifest;
  CorruptionTables corruption_tables;

  std::optional<int> budget;
  std::optional<double> reduction_factor;

  std::vector<double> iou_thresholds = default_iou_thresholds();
};

PipelineConfig load_pipeline_config(const std::string& path);

// CCL_BACKEND_URL overrides the generative endpoint (and selects the http
// backend).
void apply_env_overrides(PipelineConfig& cfg);

// Digest over the semantic parameters only; paths, workers and output
// locations stay out so reruns and worker sweeps produce identical bytes.
uint64_t config_digest(const PipelineConfig& cfg);
std::string provenance_json(const PipelineConfig& cfg);

struct CommandCounts {
  int processed = 0;
  int augmented = 0;
  int skipped = 0;
  int rejected = 0;
  int written = 0;
};

// select: coverage-first subset -> out_dir/selected_ids.txt
CommandCounts cmd_select(const PipelineConfig& cfg);

// augment: donor insertion over the corpus -> images, masks, annotations.json
CommandCounts cmd_augment(const PipelineConfig& cfg);

// gen-bg: background pool -> out_dir/manifest.jsonl + images
CommandCounts cmd_genbg(const PipelineConfig& cfg);

// replace: same-foreground variant groups -> images, groups.jsonl,
// rejected.jsonl, annotations.json
CommandCounts cmd_replace(const PipelineConfig& cfg);

// build-bench: background-variant or corruption benchmark -> images,
// index.jsonl, annotations.json
CommandCounts cmd_build_bench(const PipelineConfig& cfg);

// corrupt: one image, one corruption.
void cmd_corrupt_image(const PipelineConfig& cfg, const std::string& input_path,
                       CorruptionKind kind, int severity,
                       const std::string& output_path);

struct EvalReport {
  std::map<std::string, double> ap;              // partition name -> AP
  std::map<std::string, double> corrupted_full;  // corruption label -> FULL AP
  std::optional<double> mfull_value;
  std::optional<double> rfull_value;
};

// eval: AP per partition plus mFULL/rFULL when per-corruption predictions
// are supplied -> metrics.json + metrics.txt under out_dir.
EvalReport cmd_eval(const PipelineConfig& cfg, const std::string& predictions_path,
                    const std::vector<std::pair<std::string, std::string>>& corrupted_predictions,
                    const std::string& corrupted_gt_path = "");

struct LossReport {
  double image_loss = 0.0;
  std::optional<double> text_loss;
  double consistency = 0.0;
};

LossReport cmd_loss(const PipelineConfig& cfg, const std::string& image_features_path,
                    const std::string& text_features_path = "");

struct GradCheckReport {
  double max_relative_error = 0.0;
  double loss = 0.0;
};

GradCheckReport cmd_grad_check(const PipelineConfig& cfg,
                               const std::string& features_path, double h = 1e-4);

}  // namespace ccl
