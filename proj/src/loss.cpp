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

#include "ccl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <nlohmann/json.hpp>

#include "ccl/errors.hpp"
#include "ccl/image_io.hpp"

namespace ccl {

namespace {

// Sorting before accumulation makes every reduction invariant to the order
// of its inputs, which is what gives the loss its exact permutation
// invariances.
double stable_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

FeatureBatch normalized_copy(const FeatureBatch& fb) {
  FeatureBatch out = fb;
  for (int c = 0; c < fb.categories; ++c) {
    for (int k = 0; k < fb.variants; ++k) {
      const double n = norm(fb.vec(c, k));
      for (int d = 0; d < fb.dims; ++d) out.at(c, k, d) = fb.at(c, k, d) / n;
    }
  }
  return out;
}

struct LossTerms {
  int c_count, k_count, dims;
  std::vector<std::vector<double>> centroids;   // per category
  std::vector<double> centroid_norm;            // per category
  std::vector<double> vec_norm;                 // per (c,k) flattened
  std::vector<double> anchor_sim;               // cos(f_ck, g_c) per (c,k)
  std::vector<std::vector<double>> pair_sim;    // cos(f_a, f_b), CK x CK
  std::vector<double> lse;                      // per anchor
  std::vector<std::vector<double>> softmax;     // exp(sim/tau - lse) per anchor
};

LossTerms compute_terms(const FeatureBatch& fb, double tau) {
  const int C = fb.categories, K = fb.variants;
  const int n = C * K;
  LossTerms t;
  t.c_count = C;
  t.k_count = K;
  t.dims = fb.dims;
  t.centroids.resize(C);
  t.centroid_norm.resize(C);
  for (int c = 0; c < C; ++c) {
    t.centroids[c] = centroid(fb, c);
    t.centroid_norm[c] = norm(t.centroids[c]);
  }
  t.vec_norm.resize(n);
  t.anchor_sim.resize(n);
  t.pair_sim.assign(n, std::vector<double>(n));
  t.lse.resize(n);
  t.softmax.assign(n, std::vector<double>(n));
  for (int c = 0; c < C; ++c) {
    for (int k = 0; k < K; ++k) {
      const int a = c * K + k;
      t.vec_norm[a] = norm(fb.vec(c, k));
      t.anchor_sim[a] = cosine_similarity(fb.vec(c, k), t.centroids[c]);
    }
  }
  for (int a = 0; a < n; ++a) {
    const auto va = fb.vec(a / K, a % K);
    for (int b = 0; b < n; ++b) {
      t.pair_sim[a][b] = cosine_similarity(va, fb.vec(b / K, b % K));
    }
  }
  for (int a = 0; a < n; ++a) {
    double mx = t.pair_sim[a][0] / tau;
    for (int b = 1; b < n; ++b) mx = std::max(mx, t.pair_sim[a][b] / tau);
    std::vector<double> exps(n);
    for (int b = 0; b < n; ++b) exps[b] = std::exp(t.pair_sim[a][b] / tau - mx);
    t.lse[a] = mx + std::log(stable_sum(exps));
    for (int b = 0; b < n; ++b) {
      t.softmax[a][b] = std::exp(t.pair_sim[a][b] / tau - t.lse[a]);
    }
  }
  return t;
}

}  // namespace

FeatureBatch FeatureBatch::zeros(int c, int k, int d, Modality m) {
  FeatureBatch fb;
  fb.categories = c;
  fb.variants = k;
  fb.dims = d;
  fb.modality = m;
  fb.values.assign(static_cast<size_t>(c) * k * d, 0.0);
  return fb;
}

void FeatureBatch::validate() const {
  if (categories < 1 || variants < 1 || dims < 1) {
    throw ConfigInvalidError("feature batch: all dims must be >= 1");
  }
  if (values.size() != static_cast<size_t>(categories) * variants * dims) {
    throw ConfigInvalidError("feature batch: value count does not match dims");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NonFiniteError("feature batch: non-finite entry");
  }
  for (int c = 0; c < categories; ++c) {
    for (int k = 0; k < variants; ++k) {
      double acc = 0.0;
      for (int d = 0; d < dims; ++d) acc += at(c, k, d) * at(c, k, d);
      if (acc == 0.0) {
        throw ZeroNormVectorError("feature batch: zero vector at (c=" +
                                  std::to_string(c) + ", k=" + std::to_string(k) + ")");
      }
    }
  }
}

std::vector<double> caaf_pool(const RegionFeatureMap& rf, PoolMode mode) {
  const BBox& r = rf.region;
  if (!r.valid() || r.x < 0 || r.y < 0 || r.x2() > rf.grid_w || r.y2() > rf.grid_h) {
    throw EmptyRegionError("caaf_pool: region empty or outside the grid");
  }
  std::vector<double> out(rf.dims, mode == PoolMode::max
                                       ? -std::numeric_limits<double>::infinity()
                                       : 0.0);
  for (int y = r.y; y < r.y2(); ++y) {
    for (int x = r.x; x < r.x2(); ++x) {
      for (int d = 0; d < rf.dims; ++d) {
        const double v = rf.values[rf.index(x, y, d)];
        if (mode == PoolMode::max) {
          out[d] = std::max(out[d], v);
        } else {
          out[d] += v;
        }
      }
    }
  }
  if (mode == PoolMode::mean) {
    const double count = static_cast<double>(r.area());
    for (double& v : out) v /= count;
  }
  return out;
}

std::vector<double> centroid(const FeatureBatch& fb, int c) {
  std::vector<double> out(fb.dims, 0.0);
  std::vector<double> column(fb.variants);
  for (int d = 0; d < fb.dims; ++d) {
    for (int k = 0; k < fb.variants; ++k) column[k] = fb.at(c, k, d);
    out[d] = stable_sum(column) / fb.variants;
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double modality_consistency_loss(const FeatureBatch& fb, double tau,
                                 bool prenormalize) {
  if (tau <= 0.0) throw NonPositiveTauError("loss: tau must be > 0");
  fb.validate();
  if (prenormalize) {
    return modality_consistency_loss(normalized_copy(fb), tau, false);
  }
  const LossTerms t = compute_terms(fb, tau);
  const int n = fb.categories * fb.variants;
  std::vector<double> terms(n);
  for (int a = 0; a < n; ++a) terms[a] = t.anchor_sim[a] / tau - t.lse[a];
  return -stable_sum(terms) / n;
}

std::vector<double> modality_consistency_grad(const FeatureBatch& fb, double tau,
                                              bool prenormalize) {
  if (tau <= 0.0) throw NonPositiveTauError("grad: tau must be > 0");
  fb.validate();
  if (prenormalize) {
    const FeatureBatch unit = normalized_copy(fb);
    const std::vector<double> inner = modality_consistency_grad(unit, tau, false);
    // Chain rule through y = x / |x|: dL/dx = (g - (g . y) y) / |x|.
    std::vector<double> out(inner.size());
    for (int c = 0; c < fb.categories; ++c) {
      for (int k = 0; k < fb.variants; ++k) {
        const size_t base = fb.index(c, k);
        const double nx = norm(fb.vec(c, k));
        double gy = 0.0;
        for (int d = 0; d < fb.dims; ++d) gy += inner[base + d] * unit.values[base + d];
        for (int d = 0; d < fb.dims; ++d) {
          out[base + d] = (inner[base + d] - gy * unit.values[base + d]) / nx;
        }
      }
    }
    return out;
  }

  const int C = fb.categories, K = fb.variants, D = fb.dims;
  const int n = C * K;
  const LossTerms t = compute_terms(fb, tau);
  const double coef = 1.0 / (static_cast<double>(n) * tau);
  std::vector<double> grad(fb.values.size(), 0.0);

  // d cos(a, b) / da = (b/|b| - cos * a/|a|) / |a|; zero when |b| == 0.
  auto add_dcos_first = [&](int a_idx, std::span<const double> a_vec, double a_norm,
                            std::span<const double> b_vec, double b_norm, double cos_ab,
                            double scale, size_t out_base) {
    (void)a_idx;
    if (b_norm == 0.0) return;
    for (int d = 0; d < D; ++d) {
      const double g = (b_vec[d] / b_norm - cos_ab * a_vec[d] / a_norm) / a_norm;
      grad[out_base + d] += scale * g;
    }
  };

  for (int p = 0; p < C; ++p) {
    for (int q = 0; q < K; ++q) {
      const int a = p * K + q;
      const size_t base = fb.index(p, q);
      const auto f_pq = fb.vec(p, q);

      // Numerator, anchor side: -coef * d/df_pq cos(f_pq, g_p).
      add_dcos_first(a, f_pq, t.vec_norm[a], t.centroids[p], t.centroid_norm[p],
                     t.anchor_sim[a], -coef, base);

      // Numerator, centroid path: g_p depends on f_pq with Jacobian I/K, for
      // every anchor (p, k).
      if (t.centroid_norm[p] != 0.0) {
        for (int k = 0; k < K; ++k) {
          const int b = p * K + k;
          const auto f_pk = fb.vec(p, k);
          for (int d = 0; d < D; ++d) {
            const double g = (f_pk[d] / t.vec_norm[b] -
                              t.anchor_sim[b] * t.centroids[p][d] / t.centroid_norm[p]) /
                             t.centroid_norm[p];
            grad[base + d] += -coef * g / K;
          }
        }
      }

      // Denominator, anchor side: softmax-weighted pull toward every vector.
      for (int b = 0; b < n; ++b) {
        const auto f_b = fb.vec(b / K, b % K);
        add_dcos_first(a, f_pq, t.vec_norm[a], f_b, t.vec_norm[b], t.pair_sim[a][b],
                       coef * t.softmax[a][b], base);
      }

      // Denominator, comparison side: f_pq appears as second argument of
      // every anchor's sum.
      for (int b = 0; b < n; ++b) {
        const auto f_b = fb.vec(b / K, b % K);
        add_dcos_first(b, f_pq, t.vec_norm[a], f_b, t.vec_norm[b], t.pair_sim[b][a],
                       coef * t.softmax[b][a], base);
      }
    }
  }
  return grad;
}

std::vector<double> finite_difference_grad(const FeatureBatch& fb, double tau,
                                           double h, bool prenormalize) {
  FeatureBatch probe = fb;
  std::vector<double> out(fb.values.size());
  for (size_t i = 0; i < fb.values.size(); ++i) {
    const double orig = probe.values[i];
    probe.values[i] = orig + h;
    const double up = modality_consistency_loss(probe, tau, prenormalize);
    probe.values[i] = orig - h;
    const double down = modality_consistency_loss(probe, tau, prenormalize);
    probe.values[i] = orig;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

double max_relative_grad_error(const std::vector<double>& analytic,
                               const std::vector<double>& reference) {
  if (analytic.size() != reference.size()) {
    throw ConfigInvalidError("grad error: size mismatch");
  }
  double scale = 0.0;
  for (double v : reference) scale = std::max(scale, std::fabs(v));
  scale = std::max(scale, 1e-12);
  double worst = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::fabs(analytic[i] - reference[i]) / scale);
  }
  return worst;
}

double consistency_loss(const FeatureBatch& img, const FeatureBatch* txt,
                        const LossConfig& cfg) {
  if (cfg.tau <= 0.0) throw NonPositiveTauError("consistency_loss: tau must be > 0");
  double out = 0.0;
  if (cfg.lambda_t != 0.0) {
    if (txt == nullptr) {
      throw MissingTextBatchError("consistency_loss: lambda_t > 0 needs a text batch");
    }
    out += cfg.lambda_t * modality_consistency_loss(*txt, cfg.tau, cfg.prenormalize);
  }
  out += cfg.lambda_i * modality_consistency_loss(img, cfg.tau, cfg.prenormalize);
  return out;
}

double total_loss(double l_cls, double l_loc, double l_cons) {
  if (!std::isfinite(l_cls) || !std::isfinite(l_loc) || !std::isfinite(l_cons)) {
    throw NonFiniteError("total_loss: non-finite component");
  }
  return l_cls + l_loc + l_cons;
}

namespace {

constexpr char kMagic[4] = {'F', 'B', 'T', '1'};

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

uint32_t get_u32(const std::vector<uint8_t>& in, size_t off) {
  return static_cast<uint32_t>(in[off]) | (static_cast<uint32_t>(in[off + 1]) << 8) |
         (static_cast<uint32_t>(in[off + 2]) << 16) |
         (static_cast<uint32_t>(in[off + 3]) << 24);
}

}  // namespace

std::vector<uint8_t> encode_feature_batch(const FeatureBatch& fb) {
  std::vector<uint8_t> out;
  out.reserve(16 + fb.values.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, static_cast<uint32_t>(fb.categories));
  put_u32(out, static_cast<uint32_t>(fb.variants));
  put_u32(out, static_cast<uint32_t>(fb.dims));
  for (double v : fb.values) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
  return out;
}

FeatureBatch decode_feature_batch(const std::vector<uint8_t>& bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
    if (bytes.size() < 16) throw IoFailureError("feature batch: truncated header");
    FeatureBatch fb;
    fb.categories = static_cast<int>(get_u32(bytes, 4));
    fb.variants = static_cast<int>(get_u32(bytes, 8));
    fb.dims = static_cast<int>(get_u32(bytes, 12));
    const size_t count =
        static_cast<size_t>(fb.categories) * fb.variants * fb.dims;
    if (bytes.size() != 16 + count * 4) {
      throw IoFailureError("feature batch: payload size does not match dims");
    }
    fb.values.resize(count);
    for (size_t i = 0; i < count; ++i) {
      const uint32_t bits = get_u32(bytes, 16 + i * 4);
      float f;
      std::memcpy(&f, &bits, 4);
      fb.values[i] = static_cast<double>(f);
    }
    return fb;
  }

  // JSON fixture form.
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw IoFailureError(std::string("feature batch: neither FBT1 nor JSON: ") + e.what());
  }
  FeatureBatch fb;
  if (j.contains("modality") && j["modality"] == "text") fb.modality = Modality::text;
  const auto& vals = j.at("values");
  fb.categories = static_cast<int>(vals.size());
  if (fb.categories == 0) throw ConfigInvalidError("feature batch: empty values");
  fb.variants = static_cast<int>(vals[0].size());
  fb.dims = static_cast<int>(vals[0][0].size());
  for (const auto& cat : vals) {
    if (static_cast<int>(cat.size()) != fb.variants) {
      throw ConfigInvalidError("feature batch: ragged variant dimension");
    }
    for (const auto& vec : cat) {
      if (static_cast<int>(vec.size()) != fb.dims) {
        throw ConfigInvalidError("feature batch: ragged feature dimension");
      }
      for (const auto& v : vec) fb.values.push_back(v.get<double>());
    }
  }
  return fb;
}

FeatureBatch load_feature_batch(const std::string& path) {
  return decode_feature_batch(read_binary_file(path));
}

void save_feature_batch(const std::string& path, const FeatureBatch& fb) {
  write_binary_file(path, encode_feature_batch(fb));
}

}  // namespace ccl
