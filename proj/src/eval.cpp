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

#include "ccl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ccl/errors.hpp"

namespace ccl {

using nlohmann::json;

std::string partition_name(Partition p) {
  switch (p) {
    case Partition::full: return "FULL";
    case Partition::presence: return "PRES";
    case Partition::absence: return "ABS";
  }
  return "FULL";
}

void validate_eval_set(const EvalSet& es) {
  validate_annotation_doc(es.ground_truth);
  std::unordered_set<std::string> image_ids;
  for (const auto& img : es.ground_truth.images) image_ids.insert(img.id);
  for (const auto& p : es.predictions) {
    if (!std::isfinite(p.score) || p.score < 0.0 || p.score > 1.0) {
      throw ConfigInvalidError("prediction score out of [0, 1] on image " + p.image_id);
    }
    if (!p.bbox.valid()) {
      throw ConfigInvalidError("prediction with degenerate bbox on image " + p.image_id);
    }
    if (!image_ids.count(p.image_id)) {
      throw ConfigInvalidError("prediction references unknown image " + p.image_id);
    }
  }
}

std::vector<double> default_iou_thresholds() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back(0.5 + 0.05 * i);
  return out;
}

namespace {

// Label ids admitted by the partition. A label's type comes from the
// description_type of its ground-truth annotations; mixing types within one
// label is rejected.
std::set<int> partition_labels(const AnnotationDoc& gt, Partition partition) {
  std::map<int, std::string> label_type;
  for (const auto& ann : gt.annotations) {
    auto [it, inserted] = label_type.emplace(ann.category_id, ann.description_type);
    if (!inserted && it->second != ann.description_type) {
      throw ConfigInvalidError("label " + std::to_string(ann.category_id) +
                               " mixes description types");
    }
  }
  std::set<int> out;
  for (const auto& [label, type] : label_type) {
    if (partition == Partition::full ||
        (partition == Partition::presence && type == "presence") ||
        (partition == Partition::absence && type == "absence")) {
      out.insert(label);
    }
  }
  return out;
}

struct ScoredFlag {
  double score;
  bool tp;
};

// Greedy per-image matching at one IoU threshold; returns score/TP pairs in
// descending score order within the image.
std::vector<ScoredFlag> match_image(const std::vector<const Prediction*>& preds,
                                    const std::vector<const BBox*>& gts,
                                    double threshold) {
  std::vector<const Prediction*> order = preds;
  std::stable_sort(order.begin(), order.end(),
                   [](const Prediction* a, const Prediction* b) { return a->score > b->score; });
  std::vector<bool> taken(gts.size(), false);
  std::vector<ScoredFlag> out;
  out.reserve(order.size());
  for (const Prediction* p : order) {
    int best = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(p->bbox, *gts[g]);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    const bool tp = best >= 0 && best_iou >= threshold;
    if (tp) taken[best] = true;
    out.push_back({p->score, tp});
  }
  return out;
}

// 101-point interpolated AP from a pooled, score-sorted TP/FP sequence.
double interpolated_ap(const std::vector<ScoredFlag>& pooled, size_t gt_count) {
  if (gt_count == 0) return 0.0;
  std::vector<double> precision(pooled.size()), recall(pooled.size());
  size_t tp_cum = 0;
  for (size_t i = 0; i < pooled.size(); ++i) {
    if (pooled[i].tp) ++tp_cum;
    precision[i] = static_cast<double>(tp_cum) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp_cum) / static_cast<double>(gt_count);
  }
  // Envelope from the right.
  for (size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double total = 0.0;
  size_t idx = 0;
  for (int j = 0; j <= 100; ++j) {
    const double r = j / 100.0;
    while (idx < recall.size() && recall[idx] < r) ++idx;
    if (idx < recall.size()) total += precision[idx];
  }
  return total / 101.0;
}

}  // namespace

double evaluate_ap(const EvalSet& es, const std::vector<double>& iou_thresholds,
                   Partition partition) {
  validate_eval_set(es);
  if (iou_thresholds.empty()) {
    throw ConfigInvalidError("evaluate_ap: need at least one IoU threshold");
  }
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw ConfigInvalidError("evaluate_ap: thresholds must lie in (0, 1]");
    }
  }
  const std::set<int> labels = partition_labels(es.ground_truth, partition);
  if (labels.empty()) {
    throw EmptyGroundTruthError("evaluate_ap: no ground truth in partition " +
                                partition_name(partition));
  }

  // Group ground truth and predictions by (image, label), preserving input
  // order so score ties resolve deterministically.
  std::vector<std::string> image_order;
  std::unordered_map<std::string, std::unordered_map<int, std::vector<const BBox*>>> gt_by;
  for (const auto& img : es.ground_truth.images) {
    image_order.push_back(img.id);
    gt_by[img.id];
  }
  for (const auto& ann : es.ground_truth.annotations) {
    if (!labels.count(ann.category_id)) continue;
    gt_by[ann.image_id][ann.category_id].push_back(&ann.bbox);
  }
  std::unordered_map<std::string, std::unordered_map<int, std::vector<const Prediction*>>> pred_by;
  for (const auto& p : es.predictions) {
    if (!labels.count(p.category_id)) continue;
    pred_by[p.image_id][p.category_id].push_back(&p);
  }

  double threshold_sum = 0.0;
  for (const double t : iou_thresholds) {
    double label_sum = 0.0;
    int counted_labels = 0;
    for (const int label : labels) {
      size_t gt_count = 0;
      std::vector<ScoredFlag> pooled;
      for (const auto& image_id : image_order) {
        const auto& gt_map = gt_by[image_id];
        auto git = gt_map.find(label);
        const std::vector<const BBox*> empty_gt;
        const auto& gts = git == gt_map.end() ? empty_gt : git->second;
        gt_count += gts.size();
        auto pit = pred_by.find(image_id);
        if (pit == pred_by.end()) continue;
        auto plit = pit->second.find(label);
        if (plit == pit->second.end()) continue;
        const auto matched = match_image(plit->second, gts, t);
        pooled.insert(pooled.end(), matched.begin(), matched.end());
      }
      if (gt_count == 0) continue;  // label has no boxes in this partition
      std::stable_sort(pooled.begin(), pooled.end(),
                       [](const ScoredFlag& a, const ScoredFlag& b) { return a.score > b.score; });
      label_sum += interpolated_ap(pooled, gt_count);
      ++counted_labels;
    }
    if (counted_labels == 0) {
      throw EmptyGroundTruthError("evaluate_ap: no ground truth boxes in partition " +
                                  partition_name(partition));
    }
    threshold_sum += label_sum / counted_labels;
  }
  return threshold_sum / static_cast<double>(iou_thresholds.size());
}

double mfull(const std::vector<double>& full_values) {
  if (full_values.empty()) throw EmptyListError("mfull: empty input");
  double acc = 0.0;
  for (double v : full_values) acc += v;
  return acc / static_cast<double>(full_values.size());
}

double rfull(double mfull_v, double full_v) {
  if (!(full_v > 0.0)) throw ZeroCleanScoreError("rfull: clean score must be > 0");
  return 100.0 * mfull_v / full_v;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailureError("cannot open predictions: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("predictions: invalid JSON in " + path + ": " + e.what());
  }
  std::vector<Prediction> out;
  try {
    for (const auto& jp : j.at("predictions")) {
      Prediction p;
      p.image_id = jp.at("image_id").get<std::string>();
      const auto& bb = jp.at("bbox");
      p.bbox = BBox{bb[0].get<int>(), bb[1].get<int>(), bb[2].get<int>(), bb[3].get<int>()};
      p.category_id = jp.at("category_id").get<int>();
      p.score = jp.at("score").get<double>();
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ConfigInvalidError("predictions: schema error in " + path + ": " + e.what());
  }
  return out;
}

void save_predictions(const std::string& path, const std::vector<Prediction>& preds,
                      const std::string& provenance_json) {
  json j;
  if (!provenance_json.empty()) j["provenance"] = json::parse(provenance_json);
  j["predictions"] = json::array();
  for (const auto& p : preds) {
    j["predictions"].push_back({{"image_id", p.image_id},
                                {"bbox", {p.bbox.x, p.bbox.y, p.bbox.w, p.bbox.h}},
                                {"category_id", p.category_id},
                                {"score", p.score}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailureError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ccl
