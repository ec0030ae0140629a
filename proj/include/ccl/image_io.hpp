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

#include "ccl/image.hpp"

namespace ccl {

// Decodes PNG or JPEG, dispatching on the file signature. PNG keeps its
// channel count (gray/RGB/RGBA, palettes expanded, 16-bit narrowed); JPEG
// decodes to gray or RGB.
Image load_image(const std::string& path);
Image decode_image(const std::vector<uint8_t>& bytes);

// Encodes with fixed settings so identical pixels produce identical bytes.
std::vector<uint8_t> encode_png(const Image& img);
void save_png(const std::string& path, const Image& img);

std::vector<uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace ccl
