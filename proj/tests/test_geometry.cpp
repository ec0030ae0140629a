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

#include <set>

#include "ccl/errors.hpp"
#include "ccl/geometry.hpp"
#include "ccl/rng.hpp"
#include "oracles.hpp"

using ccl::BBox;
using ccl::Mask;

namespace {

BBox random_box(ccl::Rng& rng, int canvas) {
  BBox b;
  b.w = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(canvas / 2)));
  b.h = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(canvas / 2)));
  b.x = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(canvas - b.w + 1)));
  b.y = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(canvas - b.h + 1)));
  return b;
}

}  // namespace

TEST_CASE("iou identity and disjoint cases") {
  CHECK(ccl::iou({0, 0, 10, 10}, {0, 0, 10, 10}) == doctest::Approx(1.0));
  CHECK(ccl::iou({0, 0, 10, 10}, {20, 20, 5, 5}) == doctest::Approx(0.0));
}

TEST_CASE("iou half-shifted boxes match the pixel-count value") {
  const BBox a{0, 0, 10, 10}, b{5, 0, 10, 10};
  // Frozen from the pixel-counting route: 50 / 150.
  CHECK(ccl::iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(oracle::iou_by_pixel_count(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("iou agrees with the pixel-count route on random boxes") {
  ccl::Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    const BBox a = random_box(rng, 40);
    const BBox b = random_box(rng, 40);
    CHECK(ccl::iou(a, b) == doctest::Approx(oracle::iou_by_pixel_count(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("iou symmetry, range, and self-identity") {
  ccl::Rng rng(202);
  for (int i = 0; i < 500; ++i) {
    const BBox a = random_box(rng, 64);
    const BBox b = random_box(rng, 64);
    const double ab = ccl::iou(a, b);
    CHECK(ab == ccl::iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(ccl::iou(a, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("intersects is equivalent to iou > 0 and rejects touching edges") {
  CHECK_FALSE(ccl::intersects({0, 0, 10, 10}, {10, 0, 10, 10}));
  CHECK(ccl::intersects({0, 0, 10, 10}, {2, 2, 3, 3}));  // nested
  ccl::Rng rng(303);
  for (int i = 0; i < 500; ++i) {
    const BBox a = random_box(rng, 32);
    const BBox b = random_box(rng, 32);
    CHECK(ccl::intersects(a, b) == (ccl::iou(a, b) > 0.0));
  }
}

TEST_CASE("mask_to_bbox full and single-pixel masks") {
  Mask full = Mask::make(4, 4, 1);
  CHECK(ccl::mask_to_bbox(full) == BBox{0, 0, 4, 4});

  Mask single = Mask::make(8, 8);
  single.set(2, 3, true);
  CHECK(ccl::mask_to_bbox(single) == BBox{2, 3, 1, 1});

  Mask empty = Mask::make(4, 4);
  CHECK_THROWS_AS(ccl::mask_to_bbox(empty), ccl::EmptyMaskError);
}

TEST_CASE("mask_to_bbox equals the exhaustive scan on random sparse masks") {
  ccl::Rng rng(404);
  for (int i = 0; i < 100; ++i) {
    Mask m = Mask::make(24, 17);
    const int bits = 1 + static_cast<int>(rng.uniform_below(20));
    for (int b = 0; b < bits; ++b) {
      m.set(static_cast<int>(rng.uniform_below(24)),
            static_cast<int>(rng.uniform_below(17)), true);
    }
    const BBox got = ccl::mask_to_bbox(m);
    CHECK(got == oracle::mask_bbox_by_scan(m));
    // Tightness: every set bit inside, every edge row/column hits a bit.
    bool edge_left = false, edge_right = false, edge_top = false, edge_bottom = false;
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) {
        if (!m.at(x, y)) continue;
        CHECK(x >= got.x);
        CHECK(x < got.x2());
        CHECK(y >= got.y);
        CHECK(y < got.y2());
        edge_left |= x == got.x;
        edge_right |= x == got.x2() - 1;
        edge_top |= y == got.y;
        edge_bottom |= y == got.y2() - 1;
      }
    }
    CHECK(edge_left);
    CHECK(edge_right);
    CHECK(edge_top);
    CHECK(edge_bottom);
  }
}

TEST_CASE("candidate_grid: 100 positions on a 100x100 image form the 10-pitch lattice") {
  const auto grid = ccl::candidate_grid(100, 100, 100);
  REQUIRE(grid.positions.size() == 100);
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 10; ++c) {
      CHECK(grid.positions[r * 10 + c] == std::make_pair(5 + 10 * c, 5 + 10 * r));
    }
  }
}

TEST_CASE("candidate_grid: n = 1 yields the centered position") {
  const auto grid = ccl::candidate_grid(100, 100, 1);
  REQUIRE(grid.positions.size() == 1);
  CHECK(grid.positions[0] == std::make_pair(50, 50));
}

TEST_CASE("candidate_grid: 257x123 positions are in bounds and pairwise distinct") {
  const auto grid = ccl::candidate_grid(257, 123, 100);
  REQUIRE(grid.positions.size() == 100);
  std::set<std::pair<int, int>> seen;
  for (const auto& [x, y] : grid.positions) {
    CHECK(x >= 0);
    CHECK(x < 257);
    CHECK(y >= 0);
    CHECK(y < 123);
    seen.insert({x, y});
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("candidate_grid is pure: identical inputs give identical outputs") {
  for (int n : {1, 7, 50, 100, 144}) {
    const auto a = ccl::candidate_grid(211, 97, n);
    const auto b = ccl::candidate_grid(211, 97, n);
    CHECK(a.positions == b.positions);
    CHECK(static_cast<int>(a.positions.size()) == n);
  }
}
