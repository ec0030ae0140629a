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

#include <span>
#include <string>
#include <vector>

#include "ccl/geometry.hpp"

namespace ccl {

enum class Modality { image, text };

// Rank-3 feature tensor: C categories x K variants x D dims, c-major with d
// fastest. Every (c, k) vector must have nonzero norm.
struct FeatureBatch {
  int categories = 0;
  int variants = 0;
  int dims = 0;
  Modality modality = Modality::image;
  std::vector<double> values;

  static FeatureBatch zeros(int c, int k, int d, Modality m = Modality::image);

  size_t index(int c, int k, int d = 0) const {
    return (static_cast<size_t>(c) * variants + k) * dims + d;
  }
  double at(int c, int k, int d) const { return values[index(c, k, d)]; }
  double& at(int c, int k, int d) { return values[index(c, k, d)]; }
  std::span<const double> vec(int c, int k) const {
    return {values.data() + index(c, k), static_cast<size_t>(dims)};
  }

  // Throws ZeroNormVectorError / NonFiniteError on invalid content.
  void validate() const;
};

struct LossConfig {
  double tau = 1.0;
  double lambda_i = 0.15;
  double lambda_t = 0.05;
  bool prenormalize = false;
};

enum class PoolMode { mean, max };

// Spatial grid of D-dim feature vectors plus a region box in grid
// coordinates; y-major storage with d fastest.
struct RegionFeatureMap {
  int grid_w = 0;
  int grid_h = 0;
  int dims = 0;
  std::vector<double> values;
  BBox region;

  size_t index(int x, int y, int d = 0) const {
    return (static_cast<size_t>(y) * grid_w + x) * dims + d;
  }
};

// Pools the region's feature vectors into one aggregated vector.
std::vector<double> caaf_pool(const RegionFeatureMap& rf, PoolMode mode = PoolMode::mean);

// Mean of the K variant vectors of category c. May be the zero vector.
std::vector<double> centroid(const FeatureBatch& fb, int c);

// Cosine similarity, clamped to [-1, 1]; defined as 0 when either norm is 0.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Per-modality contrastive consistency:
//   L = -(1/CK) sum_ck log( exp(sim(v_ck, centroid_c)/tau)
//                           / sum_{c'k'} exp(sim(v_ck, v_c'k')/tau) )
// The denominator runs over every (c', k') including the anchor itself.
double modality_consistency_loss(const FeatureBatch& fb, double tau,
                                 bool prenormalize = false);

// Analytic dL/dvalues, same layout as fb.values. Includes the centroid's
// dependence on each vector and the anchor's appearance in numerator and
// denominator.
std::vector<double> modality_consistency_grad(const FeatureBatch& fb, double tau,
                                              bool prenormalize = false);

// Central finite differences of modality_consistency_loss; verification
// companion for the analytic gradient.
std::vector<double> finite_difference_grad(const FeatureBatch& fb, double tau,
                                           double h = 1e-4,
                                           bool prenormalize = false);

// max_i |a_i - b_i| normalized by the largest |b_i| (the reference side).
double max_relative_grad_error(const std::vector<double>& analytic,
                               const std::vector<double>& reference);

// lambda_t * L_text + lambda_i * L_image. The text loss is skipped entirely
// when lambda_t == 0; txt may then be null.
double consistency_loss(const FeatureBatch& img, const FeatureBatch* txt,
                        const LossConfig& cfg);

// Sum of externally supplied classification/localization losses and the
// consistency term. All inputs must be finite.
double total_loss(double l_cls, double l_loc, double l_cons);

// Binary format: magic "FBT1", three uint32 LE dims (C, K, D), then C*K*D
// float32 LE in storage order. A JSON form {"modality", "values":[[[..]]]}
// is accepted for small fixtures.
FeatureBatch load_feature_batch(const std::string& path);
void save_feature_batch(const std::string& path, const FeatureBatch& fb);
FeatureBatch decode_feature_batch(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_feature_batch(const FeatureBatch& fb);

}  // namespace ccl
