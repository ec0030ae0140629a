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

#include "ccl/annotations.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ccl/errors.hpp"
#include "ccl/image_io.hpp"

namespace ccl {

using nlohmann::json;

const ImageEntry* AnnotationDoc::find_image(const std::string& id) const {
  for (const auto& img : images) {
    if (img.id == id) return &img;
  }
  return nullptr;
}

std::vector<const AnnotationRecord*> AnnotationDoc::annotations_for(
    const std::string& image_id) const {
  std::vector<const AnnotationRecord*> out;
  for (const auto& ann : annotations) {
    if (ann.image_id == image_id) out.push_back(&ann);
  }
  return out;
}

void validate_annotation_doc(const AnnotationDoc& doc) {
  std::unordered_map<std::string, const ImageEntry*> by_id;
  for (const auto& img : doc.images) {
    if (img.id.empty()) throw ConfigInvalidError("annotation doc: image with empty id");
    if (img.width <= 0 || img.height <= 0) {
      throw ConfigInvalidError("annotation doc: non-positive dims for image " + img.id);
    }
    if (!by_id.emplace(img.id, &img).second) {
      throw ConfigInvalidError("annotation doc: duplicate image id " + img.id);
    }
  }
  std::unordered_set<int> cat_ids;
  for (const auto& cat : doc.categories) {
    if (!cat_ids.insert(cat.id).second) {
      throw ConfigInvalidError("annotation doc: duplicate category id");
    }
  }
  for (const auto& ann : doc.annotations) {
    auto it = by_id.find(ann.image_id);
    if (it == by_id.end()) {
      throw ConfigInvalidError("annotation doc: annotation references unknown image " +
                               ann.image_id);
    }
    if (!cat_ids.count(ann.category_id)) {
      throw ConfigInvalidError("annotation doc: annotation references unknown category " +
                               std::to_string(ann.category_id));
    }
    const ImageEntry& img = *it->second;
    if (!ann.bbox.valid() || ann.bbox.x < 0 || ann.bbox.y < 0 ||
        ann.bbox.x2() > img.width || ann.bbox.y2() > img.height) {
      throw ConfigInvalidError("annotation doc: bbox out of bounds on image " + ann.image_id);
    }
    if (!ann.description_type.empty() && ann.description_type != "presence" &&
        ann.description_type != "absence") {
      throw ConfigInvalidError("annotation doc: bad description_type '" +
                               ann.description_type + "'");
    }
  }
}

namespace {

BBox bbox_from_json(const json& arr) {
  if (!arr.is_array() || arr.size() != 4) {
    throw ConfigInvalidError("annotation doc: bbox must be [x, y, w, h]");
  }
  return BBox{arr[0].get<int>(), arr[1].get<int>(), arr[2].get<int>(), arr[3].get<int>()};
}

}  // namespace

AnnotationDoc load_annotation_doc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailureError("cannot open annotation doc: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("annotation doc: invalid JSON in " + path + ": " + e.what());
  }
  AnnotationDoc doc;
  try {
    for (const auto& ji : j.at("images")) {
      ImageEntry img;
      img.id = ji.at("id").get<std::string>();
      img.file = ji.at("file").get<std::string>();
      img.width = ji.at("width").get<int>();
      img.height = ji.at("height").get<int>();
      doc.images.push_back(std::move(img));
    }
    for (const auto& ja : j.at("annotations")) {
      AnnotationRecord ann;
      ann.image_id = ja.at("image_id").get<std::string>();
      ann.bbox = bbox_from_json(ja.at("bbox"));
      ann.category_id = ja.at("category_id").get<int>();
      if (ja.contains("description")) ann.description = ja["description"].get<std::string>();
      if (ja.contains("description_type")) {
        ann.description_type = ja["description_type"].get<std::string>();
      }
      doc.annotations.push_back(std::move(ann));
    }
    for (const auto& jc : j.at("categories")) {
      CategoryEntry cat;
      cat.id = jc.at("id").get<int>();
      cat.name = jc.at("name").get<std::string>();
      doc.categories.push_back(std::move(cat));
    }
  } catch (const json::exception& e) {
    throw ConfigInvalidError("annotation doc: schema error in " + path + ": " + e.what());
  }
  validate_annotation_doc(doc);
  return doc;
}

void save_annotation_doc(const std::string& path, const AnnotationDoc& doc,
                         const std::string& provenance_json) {
  json j;
  if (!provenance_json.empty()) j["provenance"] = json::parse(provenance_json);
  j["images"] = json::array();
  for (const auto& img : doc.images) {
    j["images"].push_back({{"id", img.id},
                           {"file", img.file},
                           {"width", img.width},
                           {"height", img.height}});
  }
  j["annotations"] = json::array();
  for (const auto& ann : doc.annotations) {
    json ja = {{"image_id", ann.image_id},
               {"bbox", {ann.bbox.x, ann.bbox.y, ann.bbox.w, ann.bbox.h}},
               {"category_id", ann.category_id}};
    if (!ann.description.empty()) ja["description"] = ann.description;
    if (!ann.description_type.empty()) ja["description_type"] = ann.description_type;
    j["annotations"].push_back(std::move(ja));
  }
  j["categories"] = json::array();
  for (const auto& cat : doc.categories) {
    j["categories"].push_back({{"id", cat.id}, {"name", cat.name}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailureError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

AnnotatedImage assemble_annotated_image(const AnnotationDoc& doc,
                                        const ImageEntry& entry,
                                        const std::string& images_root) {
  AnnotatedImage out;
  out.source_id = entry.id;
  const std::filesystem::path file =
      std::filesystem::path(images_root) / entry.file;
  out.pixels = load_image(file.string());
  if (out.pixels.width != entry.width || out.pixels.height != entry.height) {
    throw ConfigInvalidError("image dims in doc do not match file for " + entry.id);
  }
  size_t index = 0;
  for (const auto* rec : doc.annotations_for(entry.id)) {
    Annotation ann;
    ann.bbox = rec->bbox;
    ann.category_id = rec->category_id;
    ann.description = rec->description;
    ann.description_type = rec->description_type;
    ann.mask_ref = entry.id + "_" + std::to_string(index) + ".png";
    out.annotations.push_back(std::move(ann));
    ++index;
  }
  return out;
}

}  // namespace ccl
