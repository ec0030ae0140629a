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

#include <string>
#include <vector>

#include "ccl/annotations.hpp"
#include "ccl/geometry.hpp"

namespace ccl {

struct Prediction {
  std::string image_id;
  BBox bbox;
  int category_id = 0;  // category or description label id
  double score = 0.0;
};

enum class Partition { full, presence, absence };

std::string partition_name(Partition p);

// Ground truth plus scored predictions. Annotations carry an optional
// description_type partitioning labels into presence/absence.
struct EvalSet {
  AnnotationDoc ground_truth;
  std::vector<Prediction> predictions;
};

// Throws ConfigInvalidError when a prediction is out of range or references
// an unknown image.
void validate_eval_set(const EvalSet& es);

// 0.50:0.05:0.95, the standard ten-threshold sweep.
std::vector<double> default_iou_thresholds();

// COCO-style AP: per label, predictions are matched greedily in descending
// score order (one GT at most once, at IoU >= threshold), the pooled
// precision-recall curve is interpolated at 101 recall points, and the
// result is averaged over labels and thresholds. The partition restricts
// labels by description_type; FULL uses all of them.
double evaluate_ap(const EvalSet& es, const std::vector<double>& iou_thresholds,
                   Partition partition);

// Mean of the per-corruption scores.
double mfull(const std::vector<double>& full_values);

// 100 * mfull / full. full must be positive.
double rfull(double mfull_v, double full_v);

// One-decimal reporting rounding.
double round1(double v);

std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<Prediction>& preds,
                      const std::string& provenance_json = "");

}  // namespace ccl
