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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccl/annotations.hpp"
#include "ccl/background.hpp"
#include "ccl/geometry.hpp"
#include "ccl/image.hpp"

namespace ccl {

enum class CorruptionKind { gaussian_noise, contrast, saturation, lighting };

std::string corruption_name(CorruptionKind k);
CorruptionKind corruption_from_name(const std::string& name);
std::vector<CorruptionKind> all_corruption_kinds();

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::gaussian_noise;
  int severity = 3;  // 1..5
  uint64_t seed = 0;
};

// Per-severity parameters, index 0 = severity 1. Overridable via config.
struct CorruptionTables {
  std::array<double, 5> noise_sigma{0.04, 0.06, 0.08, 0.09, 0.10};
  std::array<double, 5> contrast_factor{0.75, 0.5, 0.4, 0.3, 0.15};
  std::array<double, 5> saturation_factor{0.9, 0.7, 0.5, 0.3, 0.1};
  std::array<double, 5> lighting_offset{0.1, 0.2, 0.3, 0.4, 0.5};
};

// Raw-parameter forms; parameters are fractions of full scale. Exposed so
// out-of-table values (e.g. an identity factor) stay reachable.
Image apply_gaussian_noise(const Image& img, double sigma, uint64_t seed);
Image apply_contrast(const Image& img, double factor);
Image apply_saturation(const Image& img, double factor);
Image apply_lighting(const Image& img, double offset);

// Severity-indexed corruption; deterministic given (img, spec).
Image corrupt(const Image& img, const CorruptionSpec& spec,
              const CorruptionTables& tables = {});

// One output of a benchmark build.
struct BenchmarkRecord {
  std::string id;
  std::string variant_of;      // empty for originals
  std::string path;            // relative to the index's directory
  std::string background_id;   // background mode only
  std::string corruption;      // corruption mode only
  int severity = 0;            // corruption mode only
  uint64_t seed = 0;           // corruption mode only (noise)
};

struct BenchmarkSet {
  std::vector<BenchmarkRecord> records;
  AnnotationDoc annotations;  // ground truth covering every output image
};

// Original + variants_per_image background-replaced composites per input
// image, written under out_dir/images. Pool records whose ids appear in
// exclude_ids (e.g. a training manifest) raise PoolOverlapError.
BenchmarkSet build_background_variants(const std::vector<AnnotatedImage>& dataset,
                                       const std::vector<std::vector<Mask>>& masks,
                                       const std::vector<BackgroundRecord>& pool,
                                       int variants_per_image, uint64_t seed,
                                       const std::string& pool_root,
                                       const std::string& out_dir,
                                       const std::vector<std::string>& exclude_ids = {},
                                       int workers = 1);

// Corrupted copies of every input image for each corruption kind and each
// requested severity, written under out_dir/images.
BenchmarkSet build_corruption_set(const std::vector<AnnotatedImage>& dataset,
                                  const std::vector<int>& severities, uint64_t seed,
                                  const std::string& out_dir,
                                  const CorruptionTables& tables = {},
                                  int workers = 1);

void save_benchmark_index(const std::string& path,
                          const std::vector<BenchmarkRecord>& records,
                          const std::string& provenance_json = "");
std::vector<BenchmarkRecord> load_benchmark_index(const std::string& path);

}  // namespace ccl
