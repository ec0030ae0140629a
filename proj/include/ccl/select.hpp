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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccl/annotations.hpp"

namespace ccl {

struct DatasetEntry {
  std::string image_id;
  std::set<int> categories;
  int bbox_count = 0;
};

struct DatasetIndex {
  std::vector<DatasetEntry> entries;
};

DatasetIndex index_from_doc(const AnnotationDoc& doc);

// Exactly one of budget / reduction_factor must be set.
struct SelectionParams {
  std::optional<int> budget;
  std::optional<double> reduction_factor;  // in (0, 1], fraction of the index kept
};

// Priority score: number of boxes plus number of distinct categories.
int priority_score(const DatasetEntry& entry);

// Coverage-first subset selection: every category present in the index gets
// at least one selected image (categories processed in ascending id order,
// each taking its best-scoring image), then remaining slots fill in
// descending score order. Ties break on lexicographic image_id. Throws
// BudgetTooSmallError listing uncovered categories when coverage does not
// fit the budget.
std::vector<std::string> select_subset(const DatasetIndex& index,
                                       const SelectionParams& params);

}  // namespace ccl
