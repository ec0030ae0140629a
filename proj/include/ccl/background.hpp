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
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ccl/image.hpp"

namespace ccl {

enum class Theme { seasonal, sky, natural_landscape };

std::string theme_name(Theme t);
Theme theme_from_name(const std::string& name);

struct ThemePrompt {
  Theme theme = Theme::seasonal;
  std::string text;
};

// One element of the generated background pool.
struct BackgroundRecord {
  std::string id;          // <theme>_<prompt-hash>_s<seed-hex>
  std::string image_path;  // relative to the manifest's directory
  Theme theme = Theme::seasonal;
  std::string prompt;
  uint64_t seed = 0;
  std::string backend_id;
};

class GenBackend {
 public:
  virtual ~GenBackend() = default;
  virtual std::string id() const = 0;
  virtual Image generate(const std::string& prompt, uint64_t seed, int width,
                         int height) = 0;
};

// Deterministic multi-octave value-noise fields mapped through a palette
// keyed off prompt keywords. Each pixel is a pure function of
// (prompt hash, seed, x, y).
class StubBackend : public GenBackend {
 public:
  std::string id() const override { return "stub"; }
  Image generate(const std::string& prompt, uint64_t seed, int width,
                 int height) override;
};

// POSTs {prompt, seed, width, height} as JSON and expects PNG bytes back.
class HttpBackend : public GenBackend {
 public:
  explicit HttpBackend(std::string url) : url_(std::move(url)) {}
  std::string id() const override { return "http"; }
  Image generate(const std::string& prompt, uint64_t seed, int width,
                 int height) override;

 private:
  std::string url_;
};

enum class PromptExpander { static_corpus, llm_endpoint };

// The instruction sent to an LLM endpoint asking for background prompts of
// one theme. Also documents what the static corpus emulates.
std::string prompt_expansion_instruction(Theme theme);

// Produces `count` pairwise-distinct prompts. The static corpus composes a
// bundled per-theme base list with time-of-day and weather modifiers; the
// llm expander POSTs {instruction, theme, count} and reads {"prompts":[..]}.
std::vector<ThemePrompt> expand_prompts(Theme theme, int count,
                                        PromptExpander expander,
                                        const std::string& endpoint_url = "");

// Generates one background, persists it under out_dir/images/ (skipping if
// present) and returns its record.
BackgroundRecord generate_background(const ThemePrompt& p, uint64_t seed,
                                     std::pair<int, int> dims, GenBackend& backend,
                                     const std::string& out_dir);

struct BackgroundSetConfig {
  std::vector<std::pair<Theme, int>> prompts_per_theme;
  int seeds_per_prompt = 11;
  int width = 512;
  int height = 512;
  uint64_t seed = 0;
  PromptExpander expander = PromptExpander::static_corpus;
  std::string expander_endpoint;
  std::string out_dir;
  std::string provenance_json;
};

struct BackgroundSetResult {
  std::vector<BackgroundRecord> records;
  int newly_generated = 0;
};

// Builds the full pool and writes out_dir/manifest.jsonl. Resumable:
// records already present in an existing manifest are not regenerated.
// Throws PartialFailureError (successes persisted first) when prompts fail.
BackgroundSetResult build_background_set(const BackgroundSetConfig& config,
                                         GenBackend& backend);

std::vector<BackgroundRecord> load_background_manifest(const std::string& path);
void save_background_manifest(const std::string& path,
                              const std::vector<BackgroundRecord>& records,
                              const std::string& provenance_json = "");

}  // namespace ccl
