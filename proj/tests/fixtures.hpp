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

#include <cstdint>
#include <string>
#include <vector>

#include "ccl/annotations.hpp"
#include "ccl/geometry.hpp"
#include "ccl/image.hpp"
#include "ccl/loss.hpp"
#include "ccl/rng.hpp"

namespace fixtures {

// Fresh directory under the system temp root; unique per call.
std::string make_temp_dir(const std::string& tag);

// Order-independent digest of a directory tree: sorted relative paths and
// file contents.
uint64_t hash_tree(const std::string& dir);

struct DatasetOptions {
  int n_images = 20;
  int width = 64;
  int height = 64;
  int n_categories = 4;
  int max_objects = 3;
  uint64_t seed = 7;
  bool with_description_types = true;  // alternate presence/absence labels
};

// Writes dir/annotations.json, dir/images/*.png and dir/masks/*.png:
// gradient backgrounds with solid non-overlapping rectangles whose masks
// match their boxes exactly.
ccl::AnnotationDoc make_synthetic_dataset(const std::string& dir,
                                          const DatasetOptions& opt);

// Random feature batch with unit-ish vectors, deterministic per seed.
ccl::FeatureBatch random_batch(int c, int k, int d, uint64_t seed);

// Runs the ccl binary (CCL_TOOL_BIN) with the given arguments; returns the
// exit code.
int run_tool(const std::vector<std::string>& args);

}  // namespace fixtures
