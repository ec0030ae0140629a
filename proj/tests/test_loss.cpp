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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ccl/errors.hpp"
#include "ccl/loss.hpp"
#include "ccl/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using ccl::FeatureBatch;
using ccl::LossConfig;
using fixtures::random_batch;

namespace {

FeatureBatch identical_vectors(int c, int k, int d) {
  FeatureBatch fb = FeatureBatch::zeros(c, k, d);
  for (int ci = 0; ci < c; ++ci) {
    for (int ki = 0; ki < k; ++ki) {
      for (int di = 0; di < d; ++di) fb.at(ci, ki, di) = di == 0 ? 0.6 : 0.8 / (d - 1 + 1e-9);
    }
  }
  // Any shared nonzero vector works; keep it simple for d == 1.
  if (d == 1) {
    for (auto& v : fb.values) v = 0.7;
  }
  return fb;
}

// The fixed batch behind the frozen value below.
FeatureBatch fixed_2x2x3() {
  FeatureBatch fb = FeatureBatch::zeros(2, 2, 3);
  const double vals[4][3] = {
      {1.0, 0.0, 0.0}, {0.8, 0.6, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.6, 0.8}};
  int i = 0;
  for (int c = 0; c < 2; ++c) {
    for (int k = 0; k < 2; ++k, ++i) {
      for (int d = 0; d < 3; ++d) fb.at(c, k, d) = vals[i][d];
    }
  }
  return fb;
}

}  // namespace

TEST_CASE("caaf_pool: constant field, singleton region, loop-mean agreement") {
  ccl::RegionFeatureMap rf;
  rf.grid_w = 6;
  rf.grid_h = 5;
  rf.dims = 3;
  rf.values.assign(static_cast<size_t>(6) * 5 * 3, 0.0);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) {
      for (int d = 0; d < 3; ++d) rf.values[rf.index(x, y, d)] = 1.5 + d;
    }
  }
  rf.region = {1, 1, 3, 2};
  auto pooled = ccl::caaf_pool(rf);
  CHECK(pooled[0] == doctest::Approx(1.5));
  CHECK(pooled[2] == doctest::Approx(3.5));

  rf.region = {2, 3, 1, 1};
  pooled = ccl::caaf_pool(rf);
  CHECK(pooled[1] == doctest::Approx(2.5));

  // Random field vs a scalar loop.
  ccl::Rng rng(11);
  for (auto& v : rf.values) v = rng.normal();
  rf.region = {1, 0, 4, 4};
  pooled = ccl::caaf_pool(rf);
  for (int d = 0; d < 3; ++d) {
    double sum = 0.0;
    int count = 0;
    for (int y = 0; y < 4; ++y) {
      for (int x = 1; x < 5; ++x) {
        sum += rf.values[rf.index(x, y, d)];
        ++count;
      }
    }
    CHECK(pooled[d] == doctest::Approx(sum / count).epsilon(1e-6));
  }

  rf.region = {5, 4, 2, 2};  // pokes outside the grid
  CHECK_THROWS_AS(ccl::caaf_pool(rf), ccl::EmptyRegionError);

  // Max pooling variant.
  rf.region = {0, 0, 6, 5};
  const auto mx = ccl::caaf_pool(rf, ccl::PoolMode::max);
  for (int d = 0; d < 3; ++d) {
    double best = -1e300;
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 6; ++x) best = std::max(best, rf.values[rf.index(x, y, d)]);
    }
    CHECK(mx[d] == doctest::Approx(best));
  }
}

TEST_CASE("centroid: K = 1 returns the vector, antipodal pair returns zero") {
  FeatureBatch one = FeatureBatch::zeros(1, 1, 3);
  one.at(0, 0, 0) = 3.0;
  one.at(0, 0, 2) = -1.0;
  const auto c0 = ccl::centroid(one, 0);
  CHECK(c0[0] == doctest::Approx(3.0));
  CHECK(c0[2] == doctest::Approx(-1.0));

  FeatureBatch anti = FeatureBatch::zeros(1, 2, 2);
  anti.at(0, 0, 0) = 1.0;
  anti.at(0, 1, 0) = -1.0;
  const auto cz = ccl::centroid(anti, 0);
  CHECK(cz[0] == 0.0);
  CHECK(cz[1] == 0.0);

  // Random batch vs scalar loop.
  const FeatureBatch fb = random_batch(3, 4, 5, 77);
  for (int c = 0; c < 3; ++c) {
    const auto got = ccl::centroid(fb, c);
    for (int d = 0; d < 5; ++d) {
      double sum = 0.0;
      for (int k = 0; k < 4; ++k) sum += fb.at(c, k, d);
      CHECK(got[d] == doctest::Approx(sum / 4.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("loss: the C = K = 1 batch scores exactly zero") {
  FeatureBatch fb = FeatureBatch::zeros(1, 1, 4);
  fb.at(0, 0, 0) = 0.3;
  fb.at(0, 0, 3) = -2.0;
  CHECK(ccl::modality_consistency_loss(fb, 1.0) == 0.0);
}

TEST_CASE("loss: identical-vector batches hit log(C*K) for all (C,K) in 1..4") {
  for (int c = 1; c <= 4; ++c) {
    for (int k = 1; k <= 4; ++k) {
      const FeatureBatch fb = identical_vectors(c, k, 3);
      const double got = ccl::modality_consistency_loss(fb, 1.0);
      CHECK(got == doctest::Approx(std::log(static_cast<double>(c) * k)).epsilon(1e-9));
    }
  }
  // C=2, K=2 spelled out: log 4.
  CHECK(ccl::modality_consistency_loss(identical_vectors(2, 2, 3), 1.0) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-9));
}

TEST_CASE("loss: frozen value for the fixed 2x2x3 unit-vector batch") {
  const FeatureBatch fb = fixed_2x2x3();
  // Frozen from the scalar-loop route (see oracles.cpp) evaluated offline.
  const double frozen = 1.019436767909733;
  CHECK(ccl::modality_consistency_loss(fb, 1.0) ==
        doctest::Approx(frozen).epsilon(1e-6));
  CHECK(oracle::consistency_loss_by_loop(fb, 1.0) ==
        doctest::Approx(frozen).epsilon(1e-9));
}

TEST_CASE("loss: antipodal pair with a zero centroid stays defined") {
  FeatureBatch fb = FeatureBatch::zeros(1, 2, 2);
  fb.at(0, 0, 0) = 1.0;
  fb.at(0, 1, 0) = -1.0;
  // log(e + 1/e), from the zero-centroid convention sim(v, 0) = 0.
  CHECK(ccl::modality_consistency_loss(fb, 1.0) ==
        doctest::Approx(1.126928011042972).epsilon(1e-9));
}

TEST_CASE("loss matches the scalar-loop oracle on random batches") {
  ccl::Rng pick(5);
  for (int i = 0; i < 40; ++i) {
    const int c = 1 + static_cast<int>(pick.uniform_below(4));
    const int k = 1 + static_cast<int>(pick.uniform_below(4));
    const int d = 1 + static_cast<int>(pick.uniform_below(8));
    const FeatureBatch fb = random_batch(c, k, d, 1000 + i);
    for (double tau : {0.25, 1.0, 2.0}) {
      const double got = ccl::modality_consistency_loss(fb, tau);
      const double want = oracle::consistency_loss_by_loop(fb, tau);
      CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("loss input validation") {
  FeatureBatch fb = random_batch(2, 2, 3, 9);
  CHECK_THROWS_AS(ccl::modality_consistency_loss(fb, 0.0), ccl::NonPositiveTauError);
  CHECK_THROWS_AS(ccl::modality_consistency_loss(fb, -1.0), ccl::NonPositiveTauError);
  for (int d = 0; d < 3; ++d) fb.at(1, 0, d) = 0.0;
  CHECK_THROWS_AS(ccl::modality_consistency_loss(fb, 1.0), ccl::ZeroNormVectorError);
}

TEST_CASE("loss: nonnegative over 1000 random batches") {
  ccl::Rng pick(6);
  for (int i = 0; i < 1000; ++i) {
    const int c = 1 + static_cast<int>(pick.uniform_below(3));
    const int k = 1 + static_cast<int>(pick.uniform_below(3));
    const int d = 1 + static_cast<int>(pick.uniform_below(6));
    const FeatureBatch fb = random_batch(c, k, d, 20000 + i);
    const double tau = i % 3 == 0 ? 0.5 : (i % 3 == 1 ? 1.0 : 2.0);
    CHECK(ccl::modality_consistency_loss(fb, tau) >= 0.0);
  }
}

TEST_CASE("loss: scale invariance to 1e-9 relative") {
  for (int i = 0; i < 20; ++i) {
    const FeatureBatch fb = random_batch(3, 3, 5, 3000 + i);
    const double base = ccl::modality_consistency_loss(fb, 1.0);
    for (double s : {1e-3, 1.0, 1e3}) {
      FeatureBatch scaled = fb;
      for (auto& v : scaled.values) v *= s;
      const double got = ccl::modality_consistency_loss(scaled, 1.0);
      CHECK(std::fabs(got - base) <= 1e-9 * std::max(1.0, std::fabs(base)));
    }
  }
}

TEST_CASE("loss: within-category and category permutation invariance are exact") {
  ccl::Rng pick(7);
  for (int i = 0; i < 25; ++i) {
    const int c = 2 + static_cast<int>(pick.uniform_below(3));
    const int k = 2 + static_cast<int>(pick.uniform_below(3));
    const int d = 2 + static_cast<int>(pick.uniform_below(6));
    const FeatureBatch fb = random_batch(c, k, d, 4000 + i);
    const double base = ccl::modality_consistency_loss(fb, 1.0);

    // Rotate variants inside one category.
    FeatureBatch perm_k = fb;
    const int target_c = static_cast<int>(pick.uniform_below(static_cast<uint64_t>(c)));
    for (int ki = 0; ki < k; ++ki) {
      const int src = (ki + 1) % k;
      for (int di = 0; di < d; ++di) perm_k.at(target_c, ki, di) = fb.at(target_c, src, di);
    }
    CHECK(ccl::modality_consistency_loss(perm_k, 1.0) == base);

    // Rotate whole category blocks.
    FeatureBatch perm_c = fb;
    for (int ci = 0; ci < c; ++ci) {
      const int src = (ci + 1) % c;
      for (int ki = 0; ki < k; ++ki) {
        for (int di = 0; di < d; ++di) perm_c.at(ci, ki, di) = fb.at(src, ki, di);
      }
    }
    CHECK(ccl::modality_consistency_loss(perm_c, 1.0) == base);
  }
}

TEST_CASE("loss: pulling categories apart never increases it") {
  // Two categories in the plane, intra-category geometry fixed, the second
  // category rotated progressively further away from the first.
  const double spread = 0.2;
  double previous = -1.0;
  bool first = true;
  for (double angle = 0.4; angle <= 3.0; angle += 0.2) {
    FeatureBatch fb = FeatureBatch::zeros(2, 2, 2);
    fb.at(0, 0, 0) = std::cos(-spread);
    fb.at(0, 0, 1) = std::sin(-spread);
    fb.at(0, 1, 0) = std::cos(spread);
    fb.at(0, 1, 1) = std::sin(spread);
    fb.at(1, 0, 0) = std::cos(angle - spread);
    fb.at(1, 0, 1) = std::sin(angle - spread);
    fb.at(1, 1, 0) = std::cos(angle + spread);
    fb.at(1, 1, 1) = std::sin(angle + spread);
    const double value = ccl::modality_consistency_loss(fb, 1.0);
    if (!first) CHECK(value <= previous + 1e-12);
    previous = value;
    first = false;
  }
}

TEST_CASE("grad: zero for the C = K = 1 batch") {
  FeatureBatch fb = FeatureBatch::zeros(1, 1, 3);
  fb.at(0, 0, 0) = 0.8;
  fb.at(0, 0, 1) = -0.5;
  const auto grad = ccl::modality_consistency_grad(fb, 1.0);
  const auto fd = ccl::finite_difference_grad(fb, 1.0, 1e-4);
  for (size_t i = 0; i < grad.size(); ++i) {
    CHECK(grad[i] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fd[i] == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("grad matches central finite differences on random batches") {
  ccl::Rng pick(8);
  for (int i = 0; i < 20; ++i) {
    const int c = 1 + static_cast<int>(pick.uniform_below(4));
    const int k = 1 + static_cast<int>(pick.uniform_below(4));
    const int d = 2 + static_cast<int>(pick.uniform_below(7));
    const FeatureBatch fb = random_batch(c, k, d, 5000 + i);
    const auto analytic = ccl::modality_consistency_grad(fb, 1.0);
    const auto fd = ccl::finite_difference_grad(fb, 1.0, 1e-4);
    CHECK(ccl::max_relative_grad_error(analytic, fd) < 1e-4);
    // And against finite differences over the independent loop-based loss.
    const auto fd_oracle = oracle::fd_grad_over_loop_loss(fb, 1.0, 1e-4);
    CHECK(ccl::max_relative_grad_error(analytic, fd_oracle) < 1e-4);
  }
}

TEST_CASE("grad: radial orthogonality holds where the loss is scale-free") {
  // With K = 1 each centroid coincides with its anchor, so scaling any
  // single vector leaves the loss unchanged and gradients are tangential.
  for (int i = 0; i < 10; ++i) {
    const FeatureBatch fb = random_batch(3, 1, 5, 6000 + i);
    const auto grad = ccl::modality_consistency_grad(fb, 1.0);
    for (int c = 0; c < 3; ++c) {
      double dot = 0.0, gn = 0.0, vn = 0.0;
      for (int d = 0; d < 5; ++d) {
        dot += grad[fb.index(c, 0, d)] * fb.at(c, 0, d);
        gn += grad[fb.index(c, 0, d)] * grad[fb.index(c, 0, d)];
        vn += fb.at(c, 0, d) * fb.at(c, 0, d);
      }
      CHECK(std::fabs(dot) <= 1e-6 * std::max(1.0, std::sqrt(gn) * std::sqrt(vn)));
    }
  }
  // Pre-normalized mode makes the property exact for every K: the loss then
  // depends on directions only.
  for (int i = 0; i < 10; ++i) {
    const FeatureBatch fb = random_batch(2, 3, 4, 7000 + i);
    const auto grad = ccl::modality_consistency_grad(fb, 1.0, /*prenormalize=*/true);
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < 3; ++k) {
        double dot = 0.0, gn = 0.0, vn = 0.0;
        for (int d = 0; d < 4; ++d) {
          dot += grad[fb.index(c, k, d)] * fb.at(c, k, d);
          gn += grad[fb.index(c, k, d)] * grad[fb.index(c, k, d)];
          vn += fb.at(c, k, d) * fb.at(c, k, d);
        }
        CHECK(std::fabs(dot) <= 1e-6 * std::max(1.0, std::sqrt(gn) * std::sqrt(vn)));
      }
    }
  }
}

TEST_CASE("grad: prenormalized mode still matches finite differences") {
  for (int i = 0; i < 6; ++i) {
    const FeatureBatch fb = random_batch(2, 2, 5, 8000 + i);
    const auto analytic = ccl::modality_consistency_grad(fb, 1.0, true);
    const auto fd = ccl::finite_difference_grad(fb, 1.0, 1e-4, true);
    CHECK(ccl::max_relative_grad_error(analytic, fd) < 1e-4);
  }
}

TEST_CASE("consistency_loss combines the modalities with the configured weights") {
  const FeatureBatch img = identical_vectors(2, 2, 3);
  const FeatureBatch txt = identical_vectors(2, 2, 3);
  LossConfig cfg;

  SUBCASE("decoupled setting evaluates the image side only") {
    cfg.lambda_t = 0.0;
    cfg.lambda_i = 0.15;
    const double got = ccl::consistency_loss(img, nullptr, cfg);
    CHECK(got == doctest::Approx(0.15 * std::log(4.0)).epsilon(1e-9));
  }

  SUBCASE("both weights applied to identical batches give 0.2 * log 4") {
    cfg.lambda_t = 0.05;
    cfg.lambda_i = 0.15;
    const double got = ccl::consistency_loss(img, &txt, cfg);
    CHECK(got == doctest::Approx(0.2 * std::log(4.0)).epsilon(1e-9));
  }

  SUBCASE("missing text batch with a positive weight is an error") {
    cfg.lambda_t = 0.05;
    CHECK_THROWS_AS(ccl::consistency_loss(img, nullptr, cfg), ccl::MissingTextBatchError);
  }

  SUBCASE("random batches equal the weighted sum of the parts") {
    const FeatureBatch a = random_batch(3, 2, 4, 42);
    const FeatureBatch b = random_batch(2, 3, 4, 43);
    cfg.lambda_i = 0.15;
    cfg.lambda_t = 0.05;
    const double li = ccl::modality_consistency_loss(a, cfg.tau);
    const double lt = ccl::modality_consistency_loss(b, cfg.tau);
    CHECK(ccl::consistency_loss(a, &b, cfg) ==
          doctest::Approx(cfg.lambda_t * lt + cfg.lambda_i * li).epsilon(1e-12));
  }
}

TEST_CASE("total_loss sums finite components and rejects the rest") {
  CHECK(ccl::total_loss(1.0, 2.0, 3.0) == doctest::Approx(6.0));
  CHECK(ccl::total_loss(0.0, 0.0, 2.5) == doctest::Approx(2.5));
  ccl::Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    CHECK(ccl::total_loss(a, b, c) == doctest::Approx(a + b + c).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ccl::total_loss(std::nan(""), 0.0, 0.0), ccl::NonFiniteError);
  CHECK_THROWS_AS(ccl::total_loss(0.0, INFINITY, 0.0), ccl::NonFiniteError);
}

TEST_CASE("feature batch file round trip, binary and JSON forms") {
  const std::string dir = fixtures::make_temp_dir("fbt");
  FeatureBatch fb = random_batch(3, 2, 5, 99);
  // Round to float precision so the round trip is exact.
  for (auto& v : fb.values) v = static_cast<double>(static_cast<float>(v));
  const std::string path = dir + "/batch.fbt";
  ccl::save_feature_batch(path, fb);
  const FeatureBatch back = ccl::load_feature_batch(path);
  CHECK(back.categories == 3);
  CHECK(back.variants == 2);
  CHECK(back.dims == 5);
  CHECK(back.values == fb.values);

  // JSON fixture form.
  const std::string jpath = dir + "/batch.json";
  {
    std::string text = "{\"modality\": \"text\", \"values\": [[[1.0, 2.0], [3.0, 4.0]]]}";
    std::ofstream out(jpath);
    out << text;
  }
  const FeatureBatch jb = ccl::load_feature_batch(jpath);
  CHECK(jb.categories == 1);
  CHECK(jb.variants == 2);
  CHECK(jb.dims == 2);
  CHECK(jb.modality == ccl::Modality::text);
  CHECK(jb.at(0, 1, 0) == doctest::Approx(3.0));
}
