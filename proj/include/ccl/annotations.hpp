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
#include <string>
#include <vector>

#include "ccl/geometry.hpp"
#include "ccl/image.hpp"

namespace ccl {

struct Annotation {
  BBox bbox;
  int category_id = 0;
  std::string description;       // empty when absent
  std::string description_type;  // "", "presence" or "absence"
  std::string mask_ref;          // mask file name, empty when absent

  bool operator==(const Annotation& other) const {
    return bbox == other.bbox && category_id == other.category_id &&
           description == other.description &&
           description_type == other.description_type;
  }
};

// One raster plus its object annotations; the unit flowing through the
// pipeline.
struct AnnotatedImage {
  Image pixels;
  std::vector<Annotation> annotations;
  std::string source_id;
};

struct ImageEntry {
  std::string id;
  std::string file;
  int width = 0;
  int height = 0;
};

struct CategoryEntry {
  int id = 0;
  std::string name;
};

struct AnnotationRecord {
  std::string image_id;
  BBox bbox;
  int category_id = 0;
  std::string description;
  std::string description_type;
};

// COCO-style annotation document: images, annotations, categories.
struct AnnotationDoc {
  std::vector<ImageEntry> images;
  std::vector<AnnotationRecord> annotations;
  std::vector<CategoryEntry> categories;

  const ImageEntry* find_image(const std::string& id) const;
  std::vector<const AnnotationRecord*> annotations_for(const std::string& image_id) const;
};

// Throws ConfigInvalidError on broken referential integrity or out-of-bounds
// boxes.
void validate_annotation_doc(const AnnotationDoc& doc);

AnnotationDoc load_annotation_doc(const std::string& path);

// provenance_json, when non-empty, must be a serialized JSON object; it is
// embedded under the "provenance" key.
void save_annotation_doc(const std::string& path, const AnnotationDoc& doc,
                         const std::string& provenance_json = "");

// Loads the raster named by `entry` (resolved against images_root) and
// attaches the document's annotations for it.
AnnotatedImage assemble_annotated_image(const AnnotationDoc& doc,
                                        const ImageEntry& entry,
                                        const std::string& images_root);

}  // namespace ccl
