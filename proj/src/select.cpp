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

#include "ccl/select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ccl/errors.hpp"

namespace ccl {

DatasetIndex index_from_doc(const AnnotationDoc& doc) {
  std::unordered_map<std::string, DatasetEntry> by_image;
  for (const auto& img : doc.images) {
    by_image[img.id].image_id = img.id;
  }
  for (const auto& ann : doc.annotations) {
    auto& entry = by_image[ann.image_id];
    entry.categories.insert(ann.category_id);
    entry.bbox_count += 1;
  }
  DatasetIndex index;
  for (const auto& img : doc.images) {
    const auto& entry = by_image[img.id];
    if (entry.bbox_count == 0) continue;  // images without objects are not selectable
    index.entries.push_back(entry);
  }
  return index;
}

int priority_score(const DatasetEntry& entry) {
  return entry.bbox_count + static_cast<int>(entry.categories.size());
}

std::vector<std::string> select_subset(const DatasetIndex& index,
                                       const SelectionParams& params) {
  if (params.budget.has_value() == params.reduction_factor.has_value()) {
    throw ConfigInvalidError("select: exactly one of budget / reduction_factor");
  }
  for (const auto& e : index.entries) {
    if (e.categories.empty() || e.bbox_count < static_cast<int>(e.categories.size())) {
      throw ConfigInvalidError("select: invalid entry " + e.image_id);
    }
  }
  int budget;
  if (params.budget) {
    budget = *params.budget;
  } else {
    if (*params.reduction_factor <= 0.0 || *params.reduction_factor > 1.0) {
      throw ConfigInvalidError("select: reduction_factor must be in (0, 1]");
    }
    budget = static_cast<int>(
        std::llround(*params.reduction_factor * static_cast<double>(index.entries.size())));
    budget = std::max(budget, 1);
  }
  if (budget < 1) throw ConfigInvalidError("select: budget must be >= 1");

  // Rank: higher score first, then lexicographic id.
  std::vector<const DatasetEntry*> ranked;
  ranked.reserve(index.entries.size());
  for (const auto& e : index.entries) ranked.push_back(&e);
  std::sort(ranked.begin(), ranked.end(), [](const DatasetEntry* a, const DatasetEntry* b) {
    const int sa = priority_score(*a), sb = priority_score(*b);
    if (sa != sb) return sa > sb;
    return a->image_id < b->image_id;
  });

  std::map<int, const DatasetEntry*> best_for_category;  // ordered by category id
  for (const DatasetEntry* e : ranked) {
    for (int cat : e->categories) {
      // ranked order means the first holder seen is the best one.
      best_for_category.try_emplace(cat, e);
    }
  }

  std::vector<std::string> selected;
  std::unordered_set<std::string> picked;
  std::unordered_set<int> covered;

  // Coverage phase, categories in ascending id order.
  for (const auto& [cat, best] : best_for_category) {
    if (covered.count(cat)) continue;
    if (static_cast<int>(selected.size()) >= budget) {
      std::vector<int> uncovered;
      for (const auto& [c2, e2] : best_for_category) {
        if (!covered.count(c2)) uncovered.push_back(c2);
      }
      throw BudgetTooSmallError("select: budget " + std::to_string(budget) +
                                    " cannot cover every category",
                                uncovered);
    }
    selected.push_back(best->image_id);
    picked.insert(best->image_id);
    for (int c2 : best->categories) covered.insert(c2);
  }

  // Fill phase by global score.
  for (const DatasetEntry* e : ranked) {
    if (static_cast<int>(selected.size()) >= budget) break;
    if (picked.count(e->image_id)) continue;
    selected.push_back(e->image_id);
    picked.insert(e->image_id);
  }
  return selected;
}

}  // namespace ccl
