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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace oracle {

using ccl::BBox;
using ccl::EvalSet;
using ccl::FeatureBatch;
using ccl::Image;
using ccl::Mask;
using ccl::ObjectCutout;
using ccl::Partition;
using ccl::Prediction;

double iou_by_pixel_count(const BBox& a, const BBox& b) {
  const int min_x = std::min(a.x, b.x);
  const int min_y = std::min(a.y, b.y);
  const int max_x = std::max(a.x + a.w, b.x + b.w);
  const int max_y = std::max(a.y + a.h, b.y + b.h);
  long long inter = 0, uni = 0;
  for (int y = min_y; y < max_y; ++y) {
    for (int x = min_x; x < max_x; ++x) {
      const bool in_a = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
      const bool in_b = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
      if (in_a && in_b) ++inter;
      if (in_a || in_b) ++uni;
    }
  }
  if (inter == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BBox mask_bbox_by_scan(const Mask& m) {
  int min_x = -1, min_y = -1, max_x = -1, max_y = -1;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      if (min_x < 0 || x < min_x) min_x = x;
      if (min_y < 0 || y < min_y) min_y = y;
      if (x > max_x) max_x = x;
      if (y > max_y) max_y = y;
    }
  }
  if (min_x < 0) throw std::runtime_error("oracle: empty mask");
  return BBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

Image composite_by_loop(
    const std::vector<std::pair<ObjectCutout, std::pair<int, int>>>& cutouts,
    const Image& bg) {
  Image out = bg;
  for (int y = 0; y < bg.height; ++y) {
    for (int x = 0; x < bg.width; ++x) {
      // Last opaque cutout covering this pixel wins.
      for (auto it = cutouts.rbegin(); it != cutouts.rend(); ++it) {
        const auto& [cut, pos] = *it;
        const int lx = x - pos.first;
        const int ly = y - pos.second;
        if (lx < 0 || ly < 0 || lx >= cut.pixels.width || ly >= cut.pixels.height) continue;
        if (cut.pixels.at(lx, ly, 3) != 255) continue;
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = cut.pixels.at(lx, ly, c);
        break;
      }
    }
  }
  return out;
}

namespace {

double cos_loop(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  double v = dot / (std::sqrt(na) * std::sqrt(nb));
  if (v > 1.0) v = 1.0;
  if (v < -1.0) v = -1.0;
  return v;
}

std::vector<double> vec_of(const FeatureBatch& fb, int c, int k) {
  std::vector<double> out(static_cast<size_t>(fb.dims));
  for (int d = 0; d < fb.dims; ++d) out[d] = fb.at(c, k, d);
  return out;
}

}  // namespace

double consistency_loss_by_loop(const FeatureBatch& fb, double tau) {
  const int C = fb.categories, K = fb.variants, D = fb.dims;
  std::vector<std::vector<double>> means(C, std::vector<double>(D, 0.0));
  for (int c = 0; c < C; ++c) {
    for (int k = 0; k < K; ++k) {
      for (int d = 0; d < D; ++d) means[c][d] += fb.at(c, k, d);
    }
    for (int d = 0; d < D; ++d) means[c][d] /= K;
  }
  double total = 0.0;
  for (int c = 0; c < C; ++c) {
    for (int k = 0; k < K; ++k) {
      const auto anchor = vec_of(fb, c, k);
      const double num = std::exp(cos_loop(anchor, means[c]) / tau);
      double den = 0.0;
      for (int c2 = 0; c2 < C; ++c2) {
        for (int k2 = 0; k2 < K; ++k2) {
          den += std::exp(cos_loop(anchor, vec_of(fb, c2, k2)) / tau);
        }
      }
      total += std::log(num / den);
    }
  }
  return -total / (C * K);
}

std::vector<double> fd_grad_over_loop_loss(const FeatureBatch& fb, double tau,
                                           double h) {
  FeatureBatch probe = fb;
  std::vector<double> out(fb.values.size());
  for (size_t i = 0; i < fb.values.size(); ++i) {
    const double orig = probe.values[i];
    probe.values[i] = orig + h;
    const double up = consistency_loss_by_loop(probe, tau);
    probe.values[i] = orig - h;
    const double down = consistency_loss_by_loop(probe, tau);
    probe.values[i] = orig;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

namespace {

double box_iou_loop(const BBox& a, const BBox& b) {
  const double ix = std::max(a.x, b.x);
  const double iy = std::max(a.y, b.y);
  const double ix2 = std::min(a.x + a.w, b.x + b.w);
  const double iy2 = std::min(a.y + a.h, b.y + b.h);
  const double iw = ix2 - ix, ih = iy2 - iy;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
  return inter / uni;
}

struct Flagged {
  double score;
  bool tp;
};

}  // namespace

double ap_by_prefix_enumeration(const EvalSet& es, const std::vector<double>& thresholds,
                                Partition partition) {
  // Label types from the ground truth.
  std::map<int, std::string> label_type;
  for (const auto& ann : es.ground_truth.annotations) {
    label_type[ann.category_id] = ann.description_type;
  }
  std::set<int> labels;
  for (const auto& [label, type] : label_type) {
    if (partition == Partition::full ||
        (partition == Partition::presence && type == "presence") ||
        (partition == Partition::absence && type == "absence")) {
      labels.insert(label);
    }
  }
  if (labels.empty()) throw std::runtime_error("oracle: no labels in partition");

  double threshold_total = 0.0;
  for (double thr : thresholds) {
    double label_total = 0.0;
    int label_count = 0;
    for (int label : labels) {
      // Pool detections image by image in ground-truth image order.
      std::vector<Flagged> pooled;
      size_t gt_total = 0;
      for (const auto& img : es.ground_truth.images) {
        std::vector<BBox> gts;
        for (const auto& ann : es.ground_truth.annotations) {
          if (ann.image_id == img.id && ann.category_id == label) gts.push_back(ann.bbox);
        }
        gt_total += gts.size();
        std::vector<const Prediction*> preds;
        for (const auto& p : es.predictions) {
          if (p.image_id == img.id && p.category_id == label) preds.push_back(&p);
        }
        std::stable_sort(preds.begin(), preds.end(),
                         [](const Prediction* a, const Prediction* b) {
                           return a->score > b->score;
                         });
        std::vector<bool> used(gts.size(), false);
        for (const Prediction* p : preds) {
          int best = -1;
          double best_iou = 0.0;
          for (size_t gi = 0; gi < gts.size(); ++gi) {
            if (used[gi]) continue;
            const double v = box_iou_loop(p->bbox, gts[gi]);
            if (v > best_iou) {
              best_iou = v;
              best = static_cast<int>(gi);
            }
          }
          const bool tp = best >= 0 && best_iou >= thr;
          if (tp) used[best] = true;
          pooled.push_back({p->score, tp});
        }
      }
      if (gt_total == 0) continue;
      std::stable_sort(pooled.begin(), pooled.end(),
                       [](const Flagged& a, const Flagged& b) { return a.score > b.score; });
      // 101 recall points, each answered by scanning every prefix.
      double ap_sum = 0.0;
      for (int j = 0; j <= 100; ++j) {
        const double r = j / 100.0;
        double best_precision = 0.0;
        size_t tp_cum = 0;
        for (size_t i = 0; i < pooled.size(); ++i) {
          if (pooled[i].tp) ++tp_cum;
          const double recall = static_cast<double>(tp_cum) / static_cast<double>(gt_total);
          const double precision = static_cast<double>(tp_cum) / static_cast<double>(i + 1);
          if (recall >= r) best_precision = std::max(best_precision, precision);
        }
        ap_sum += best_precision;
      }
      label_total += ap_sum / 101.0;
      ++label_count;
    }
    if (label_count == 0) throw std::runtime_error("oracle: no ground truth boxes");
    threshold_total += label_total / label_count;
  }
  return threshold_total / static_cast<double>(thresholds.size());
}

void saturation_pixel_hsl(uint8_t r8, uint8_t g8, uint8_t b8, double factor,
                          uint8_t& ro, uint8_t& go, uint8_t& bo) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double l = (mx + mn) / 2.0;
  double h = 0.0, s = 0.0;
  if (mx != mn) {
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
  s = std::min(1.0, std::max(0.0, s * factor));
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
  auto to8 = [](double v) {
    double q = std::floor(v * 255.0 + 0.5);
    if (q < 0.0) q = 0.0;
    if (q > 255.0) q = 255.0;
    return static_cast<uint8_t>(q);
  };
  ro = to8(r1 + m);
  go = to8(g1 + m);
  bo = to8(b1 + m);
}

}  // namespace oracle
