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

#include "ccl/background.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ccl/errors.hpp"
#include "ccl/image_io.hpp"
#include "ccl/rng.hpp"

namespace ccl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string theme_name(Theme t) {
  switch (t) {
    case Theme::seasonal: return "seasonal";
    case Theme::sky: return "sky";
    case Theme::natural_landscape: return "natural_landscape";
  }
  return "seasonal";
}

Theme theme_from_name(const std::string& name) {
  if (name == "seasonal") return Theme::seasonal;
  if (name == "sky") return Theme::sky;
  if (name == "natural_landscape") return Theme::natural_landscape;
  throw ConfigInvalidError("unknown theme: " + name);
}

namespace {

// Per-theme base descriptions. The natural-landscape set leads with the ten
// canonical examples the expansion instruction cites.
const std::vector<std::string>& theme_bases(Theme t) {
  static const std::vector<std::string> landscape = {
      "A vibrant spring meadow with tall grass and colorful wildflowers, where bees and "
      "butterflies flit from bloom to bloom under the warm sun",
      "A frozen river cutting through a snowy valley, with ice floes floating on the surface "
      "and snow-capped trees lining the banks",
      "A tropical waterfall plunging down into a crystal-clear pool, surrounded by dense "
      "jungle and mist rising from the water below",
      "A golden autumn forest at sunset, with leaves in shades of red and orange covering "
      "the ground and a crisp chill in the air",
      "A stormy summer beach scene with dark clouds overhead, waves crashing against the "
      "shore, and seagulls fighting the strong winds",
      "A misty morning in a bamboo forest, with soft sunlight filtering through the tall "
      "green stalks and dew on the leaves",
      "A panoramic view of rolling hills under a twilight sky, with the first stars "
      "appearing and a crescent moon rising",
      "A desert oasis at high noon, with palm trees surrounding a small pool of water and "
      "heat waves distorting the distant horizon",
      "A cherry blossom grove in full bloom, with pink petals floating on a gentle breeze "
      "and covering a quiet pathway",
      "A northern lights display over a frozen lake, with vibrant green and purple streaks "
      "reflected in the icy surface",
      "A winding gravel path through heather-covered moorland, with granite outcrops and a "
      "lone weathered pine on the ridge",
      "A turquoise alpine lake ringed by steep scree slopes, with patches of old snow "
      "clinging to the shaded couloirs",
  };
  static const std::vector<std::string> sky = {
      "A clear azure sky with thin wisps of cirrus clouds stretched by high-altitude winds",
      "A dramatic sunset sky layered in crimson, amber, and violet above a dark horizon",
      "A brooding storm sky with towering cumulonimbus clouds and curtains of distant rain",
      "A pastel dawn sky with soft pink and peach clouds catching the first light",
      "A deep night sky dusted with stars and a faint band of the Milky Way",
      "A bright midday sky with puffy cumulus clouds drifting in loose ranks",
      "An overcast sky of smooth gray stratus with a pale glow where the sun hides",
      "A turquoise tropical sky with a lone white cloud above the atmosphere's haze line",
      "An aurora-filled polar sky with rippling green and violet light across the darkness",
      "A hazy summer sky fading from washed-out blue to warm white near the horizon",
      "A moonlit sky with silver-edged clouds sliding past a bright full moon",
      "A high mountain sky of intense cobalt with lens-shaped lenticular clouds",
  };
  static const std::vector<std::string> seasonal = {
      "A spring orchard in full bloom with petals drifting over fresh green grass",
      "A summer wheat field rippling in the heat, dotted with scarlet poppies",
      "An autumn hillside covered in maples turning amber, rust, and gold",
      "A winter forest under heavy snow, branches bowed and air sparkling with frost",
      "A spring rain shower over budding hedgerows and puddled country lanes",
      "A late-summer vineyard with heavy vines and dry golden light",
      "An autumn harvest scene of stubble fields and round bales under long shadows",
      "A winter lake frozen solid, its surface etched with skate lines and drifted snow",
      "A springtime mountain valley with meltwater streams braiding through green pastures",
      "A summer evening meadow thick with fireflies and the last warm light",
      "An autumn birch grove, white trunks bright against a carpet of fallen yellow leaves",
      "A winter coastal dune field with frosted grass and a pale low sun",
  };
  switch (t) {
    case Theme::sky: return sky;
    case Theme::seasonal: return seasonal;
    case Theme::natural_landscape: return landscape;
  }
  return landscape;
}

const std::vector<std::string>& time_modifiers() {
  static const std::vector<std::string> times = {
      "", "at dawn", "at sunrise", "in the early morning", "at midday",
      "in the late afternoon", "at golden hour", "at sunset", "at dusk",
      "at twilight", "on a moonlit night", "under a starry sky", "at first light",
      "in the soft evening light", "in fading daylight", "before sunrise",
      "after sunset", "under the noon sun",
  };
  return times;
}

const std::vector<std::string>& weather_modifiers() {
  static const std::vector<std::string> weather = {
      "", "under a clear sky", "under scattered clouds", "in light rain",
      "in heavy mist", "in a gentle breeze", "under dramatic storm clouds",
      "in crisp cold air", "in shimmering heat haze", "after fresh snowfall",
      "in drifting fog", "beneath a faint rainbow", "with distant thunder",
      "in gusty wind", "under towering cumulus", "in calm still air",
      "after a passing shower", "in thin high humidity",
  };
  return weather;
}

std::string compose_prompt(Theme theme, int index) {
  const auto& bases = theme_bases(theme);
  const auto& times = time_modifiers();
  const auto& weather = weather_modifiers();
  const int b_n = static_cast<int>(bases.size());
  const int t_n = static_cast<int>(times.size());
  const int w_n = static_cast<int>(weather.size());
  const int capacity = b_n * t_n * w_n;
  const int cycle = index / capacity;
  const int in_cycle = index % capacity;
  const int b = in_cycle % b_n;
  const int t = (in_cycle / b_n) % t_n;
  const int w = (in_cycle / (b_n * t_n)) % w_n;
  std::string text = bases[b];
  if (t > 0) text += ", " + times[t];
  if (w > 0) text += ", " + weather[w];
  text += ".";
  if (cycle > 0) text += " (variation " + std::to_string(cycle + 1) + ")";
  return text;
}

std::string theme_focus(Theme t) {
  switch (t) {
    case Theme::sky: return "skies and atmospheric conditions";
    case Theme::seasonal: return "seasonal scenery";
    case Theme::natural_landscape: return "natural landscapes (sky and atmosphere)";
  }
  return "natural landscapes";
}

// Splits "http://host:port/path" into base and path for the HTTP client.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigInvalidError("endpoint url must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<ThemePrompt> expand_via_endpoint(Theme theme, int count,
                                             const std::string& endpoint_url) {
  const auto [base, path] = split_url(endpoint_url);
  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  json body = {{"instruction", prompt_expansion_instruction(theme)},
               {"theme", theme_name(theme)},
               {"count", count}};
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw EndpointUnreachableError("prompt endpoint unreachable: " + endpoint_url);
  }
  if (res->status != 200) {
    throw BackendFailureError("prompt endpoint returned status " +
                              std::to_string(res->status));
  }
  json parsed;
  try {
    parsed = json::parse(res->body);
  } catch (const json::exception& e) {
    throw BackendFailureError(std::string("prompt endpoint: invalid JSON: ") + e.what());
  }
  if (!parsed.contains("prompts") || !parsed["prompts"].is_array() ||
      static_cast<int>(parsed["prompts"].size()) < count) {
    throw BackendFailureError("prompt endpoint: missing or short 'prompts' array");
  }
  std::vector<ThemePrompt> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({theme, parsed["prompts"][i].get<std::string>()});
  }
  return out;
}

}  // namespace

std::string prompt_expansion_instruction(Theme theme) {
  return "Generate a list of diverse prompts for background image generation, "
         "focusing on " + theme_focus(theme) +
         " with seasonal variations. Provide varied descriptions covering "
         "different times of day, weather conditions, and visual elements. The "
         "prompts should be clear, creative, and specific for use in diffusion "
         "models.";
}

std::vector<ThemePrompt> expand_prompts(Theme theme, int count,
                                        PromptExpander expander,
                                        const std::string& endpoint_url) {
  if (count < 1) throw ConfigInvalidError("expand_prompts: count must be >= 1");
  if (expander == PromptExpander::llm_endpoint) {
    return expand_via_endpoint(theme, count, endpoint_url);
  }
  std::vector<ThemePrompt> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back({theme, compose_prompt(theme, i)});
  return out;
}

namespace {

double lattice_value(uint64_t base, int64_t ix, int64_t iy, int octave) {
  uint64_t u = base;
  u ^= static_cast<uint64_t>(ix) * 0x8da6b34307654321ull;
  u ^= static_cast<uint64_t>(iy) * 0xd816384175319753ull;
  u ^= static_cast<uint64_t>(octave + 1) * 0xcb1ab31f00000001ull;
  return static_cast<double>(splitmix64(u) >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(uint64_t base, double x, double y, int octave) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int64_t ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy);
  const double tx = smooth(x - fx), ty = smooth(y - fy);
  const double v00 = lattice_value(base, ix, iy, octave);
  const double v10 = lattice_value(base, ix + 1, iy, octave);
  const double v01 = lattice_value(base, ix, iy + 1, octave);
  const double v11 = lattice_value(base, ix + 1, iy + 1, octave);
  const double top = v00 * (1.0 - tx) + v10 * tx;
  const double bot = v01 * (1.0 - tx) + v11 * tx;
  return top * (1.0 - ty) + bot * ty;
}

struct Palette {
  uint8_t c0[3], c1[3], c2[3];
};

Palette palette_for_prompt(const std::string& prompt) {
  std::string lower(prompt);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto has_any = [&](std::initializer_list<const char*> words) {
    for (const char* w : words) {
      if (lower.find(w) != std::string::npos) return true;
    }
    return false;
  };
  if (has_any({"sky", "cloud", "sunset", "sunrise", "aurora", "atmosphe", "moon",
               "star", "twilight", "horizon"})) {
    return Palette{{18, 32, 84}, {96, 148, 210}, {225, 236, 248}};
  }
  if (has_any({"spring", "summer", "autumn", "winter", "season", "snow", "blossom",
               "frozen", "harvest", "frost"})) {
    return Palette{{72, 44, 24}, {188, 132, 60}, {246, 222, 180}};
  }
  return Palette{{24, 48, 28}, {96, 140, 72}, {210, 222, 186}};
}

}  // namespace

Image StubBackend::generate(const std::string& prompt, uint64_t seed, int width,
                            int height) {
  if (width <= 0 || height <= 0) {
    throw BackendFailureError("stub backend: non-positive dimensions");
  }
  const uint64_t base = fnv1a64(prompt) ^ (seed * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull);
  const Palette pal = palette_for_prompt(prompt);
  Image img = Image::make(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double field = 0.0;
      double amp_sum = 0.0;
      double amp = 1.0;
      double freq = 1.0 / 64.0;
      for (int o = 0; o < 3; ++o) {
        field += amp * value_noise(base, x * freq, y * freq, o);
        amp_sum += amp;
        amp *= 0.5;
        freq *= 2.0;
      }
      field /= amp_sum;
      // Mild vertical wash on absolute y keeps fields smooth and horizon-like.
      const double wash = std::min(1.0, y / 512.0);
      double t = 0.85 * field + 0.15 * wash;
      t = std::clamp(t, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        double v;
        if (t < 0.5) {
          const double u = t * 2.0;
          v = pal.c0[c] * (1.0 - u) + pal.c1[c] * u;
        } else {
          const double u = (t - 0.5) * 2.0;
          v = pal.c1[c] * (1.0 - u) + pal.c2[c] * u;
        }
        img.at(x, y, c) = static_cast<uint8_t>(std::lround(v));
      }
    }
  }
  return img;
}

Image HttpBackend::generate(const std::string& prompt, uint64_t seed, int width,
                            int height) {
  const auto [base, path] = split_url(url_);
  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(60, 0);
  json body = {{"prompt", prompt},
               {"seed", seed},
               {"width", width},
               {"height", height}};
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw BackendFailureError("generation endpoint unreachable: " + url_);
  }
  if (res->status != 200) {
    throw BackendFailureError("generation endpoint returned status " +
                              std::to_string(res->status));
  }
  std::vector<uint8_t> bytes(res->body.begin(), res->body.end());
  try {
    return decode_image(bytes);
  } catch (const IoFailureError& e) {
    throw BackendFailureError(std::string("generation endpoint: bad image: ") + e.what());
  }
}

namespace {

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string record_id(Theme theme, const std::string& prompt, uint64_t seed) {
  return theme_name(theme) + "_" + hex64(fnv1a64(prompt)).substr(8) + "_s" + hex64(seed);
}

json record_to_json(const BackgroundRecord& rec) {
  return json{{"id", rec.id},
              {"image_path", rec.image_path},
              {"theme", theme_name(rec.theme)},
              {"prompt", rec.prompt},
              {"seed", rec.seed},
              {"backend_id", rec.backend_id}};
}

BackgroundRecord record_from_json(const json& j) {
  BackgroundRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.image_path = j.at("image_path").get<std::string>();
  rec.theme = theme_from_name(j.at("theme").get<std::string>());
  rec.prompt = j.at("prompt").get<std::string>();
  rec.seed = j.at("seed").get<uint64_t>();
  rec.backend_id = j.at("backend_id").get<std::string>();
  return rec;
}

}  // namespace

BackgroundRecord generate_background(const ThemePrompt& p, uint64_t seed,
                                     std::pair<int, int> dims, GenBackend& backend,
                                     const std::string& out_dir) {
  if (p.text.empty()) throw ConfigInvalidError("generate_background: empty prompt");
  BackgroundRecord rec;
  rec.id = record_id(p.theme, p.text, seed);
  rec.image_path = "images/" + rec.id + ".png";
  rec.theme = p.theme;
  rec.prompt = p.text;
  rec.seed = seed;
  rec.backend_id = backend.id();

  const fs::path img_path = fs::path(out_dir) / rec.image_path;
  fs::create_directories(img_path.parent_path());
  if (!fs::exists(img_path)) {
    Image img = backend.generate(p.text, seed, dims.first, dims.second);
    if (img.width != dims.first || img.height != dims.second) {
      throw BackendFailureError("backend returned " + std::to_string(img.width) + "x" +
                                std::to_string(img.height) + ", wanted " +
                                std::to_string(dims.first) + "x" +
                                std::to_string(dims.second));
    }
    save_png(img_path.string(), img);
  }
  return rec;
}

std::vector<BackgroundRecord> load_background_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailureError("cannot open background manifest: " + path);
  std::vector<BackgroundRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigInvalidError("background manifest: bad line: " + std::string(e.what()));
    }
    if (j.contains("provenance")) continue;
    records.push_back(record_from_json(j));
  }
  return records;
}

void save_background_manifest(const std::string& path,
                              const std::vector<BackgroundRecord>& records,
                              const std::string& provenance_json) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailureError("cannot open for writing: " + path);
  if (!provenance_json.empty()) {
    out << json{{"provenance", json::parse(provenance_json)}}.dump() << "\n";
  }
  for (const auto& rec : records) out << record_to_json(rec).dump() << "\n";
}

BackgroundSetResult build_background_set(const BackgroundSetConfig& config,
                                         GenBackend& backend) {
  if (config.out_dir.empty()) throw ConfigInvalidError("background set: out_dir required");
  fs::create_directories(config.out_dir);
  const fs::path manifest_path = fs::path(config.out_dir) / "manifest.jsonl";

  // Resume: anything already recorded with an existing image is kept as-is.
  std::map<std::string, BackgroundRecord> existing;
  if (fs::exists(manifest_path)) {
    for (auto& rec : load_background_manifest(manifest_path.string())) {
      existing.emplace(rec.id, std::move(rec));
    }
  }

  BackgroundSetResult result;
  std::vector<std::string> failed;
  for (const auto& [theme, prompt_count] : config.prompts_per_theme) {
    const auto prompts =
        expand_prompts(theme, prompt_count, config.expander, config.expander_endpoint);
    for (const auto& prompt : prompts) {
      Rng rng = Rng::for_stream(config.seed, theme_name(theme) + "|" + prompt.text);
      for (int s = 0; s < config.seeds_per_prompt; ++s) {
        const uint64_t record_seed = rng.next();
        const std::string id = record_id(theme, prompt.text, record_seed);
        auto it = existing.find(id);
        if (it != existing.end() &&
            fs::exists(fs::path(config.out_dir) / it->second.image_path)) {
          result.records.push_back(it->second);
          continue;
        }
        try {
          result.records.push_back(generate_background(
              prompt, record_seed, {config.width, config.height}, backend,
              config.out_dir));
          ++result.newly_generated;
        } catch (const Error& e) {
          failed.push_back(prompt.text + " (seed " + std::to_string(record_seed) +
                           "): " + e.what());
        }
      }
    }
  }
  save_background_manifest(manifest_path.string(), result.records,
                           config.provenance_json);
  if (!failed.empty()) {
    throw PartialFailureError("background set: " + std::to_string(failed.size()) +
                                  " generation(s) failed",
                              failed);
  }
  return result;
}

}  // namespace ccl
