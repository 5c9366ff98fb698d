/*
 * Copyright 2026 The platekit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <string>
#include <vector>

#include "platekit/alphabet.hpp"
#include "platekit/glyphs.hpp"
#include "platekit/image.hpp"
#include "platekit/manifest.hpp"
#include "platekit/rng.hpp"

namespace platekit {

/// Per-position character constraints plus plate geometry. Drives generation
/// only; the recognizer never sees it.
struct LayoutGrammar {
  std::string name;
  std::vector<std::string> position_classes;  // candidate symbols per slot
  double aspect = 3.0;                        // physical w/h, used when pasting
  std::array<float, 3> fg{0.05f, 0.05f, 0.05f};
  std::array<float, 3> bg{0.92f, 0.92f, 0.92f};
  int spacing = 1;  // inter-character gap in glyph-grid pixels
  std::string atlas = "builtin:5x7";

  int positions() const { return static_cast<int>(position_classes.size()); }
  void validate(const Alphabet& alphabet) const;
  bool conforms(const std::string& s) const;
};

/// Built-ins: "ir-like", "br-like", "tw-like", "ambiguous".
LayoutGrammar builtin_grammar(const std::string& name);

/// Grammar definition file:
///   name = my-layout
///   positions = L L L {8,0,1} D
///   aspect = 3.1
///   fg = 20,20,20
///   bg = 235,235,235
///   spacing = 1
///   atlas = builtin:5x7
/// Position tokens: D (digits), L (letters), {c,c,...} explicit set.
LayoutGrammar parse_grammar_file(const std::string& path);

/// Built-in name, else treated as a file path.
LayoutGrammar resolve_grammar(const std::string& ref);

struct AugmentationConfig {
  double rot_deg = 0;                    // rotation sampled in [-rot_deg, rot_deg]
  double persp = 0;                      // corner jitter, fraction of each extent
  double blur_min = 0, blur_max = 0;     // gaussian sigma range
  double noise = 0;                      // additive gaussian sigma
  double bright_min = 1, bright_max = 1; // multiplicative brightness range
  bool night = false;  // forces brightness into [0.15,0.4], noise floor 0.05

  void validate() const;
};

/// Uniform draw per position class.
std::string sample_plate_string(const LayoutGrammar& grammar, Rng& rng);

/// Glyph cell placement used by the renderer (and by the template-matching
/// test oracle): pixel rect and integer glyph scale per character slot.
struct CellRect {
  int x = 0, y = 0, w = 0, h = 0;
  int scale = 1;
};
std::vector<CellRect> plate_layout(const LayoutGrammar& grammar, const GlyphAtlas& atlas,
                                   int out_h, int out_w, int n_chars);

/// Rasterizes a conforming string onto a plate crop at the recognizer input
/// resolution. Fully deterministic.
Image render_plate(const std::string& s, const LayoutGrammar& grammar, const GlyphAtlas& atlas,
                   int out_h, int out_w);

/// Applies rotation -> perspective -> blur -> brightness -> noise, in that
/// order. Zero-magnitude settings are the identity.
Image augment(const Image& img, const AugmentationConfig& cfg, Rng& rng);

/// Rotation about the image center with bilinear resampling and edge clamp
/// (the augment() rotation stage at a fixed angle).
Image rotate_image(const Image& img, double degrees);

struct SceneConfig {
  int size = 192;
  double plate_min = 0.3, plate_max = 0.6;  // plate width as a fraction of scene
  int max_distractors = 3;
  double background_dim = 1.0;  // multiplies background colors (night scenes)
  int retry_cap = 20;
};

struct ComposedScene {
  Image scene;
  BBox box;
};

/// Pastes the plate at a random position/scale over a procedural background
/// (gradient, distractor rectangles, light noise). The returned box is the
/// exact paste rect.
ComposedScene compose_scene(const Image& plate, Rng& rng, const SceneConfig& cfg);

struct GenConfig {
  int n = 100;
  LayoutGrammar grammar;
  AugmentationConfig aug;
  SceneConfig scene;
  double frac_train = 0.7, frac_val = 0.15, frac_test = 0.15;
  double night_fraction = 0.0;
  int plate_h = 32, plate_w = 96;  // crop resolution (= recognizer input)
  std::string out_dir;
  uint64_t seed = 0;
  int threads = 0;

  void validate() const;
};

struct GenResult {
  std::string scenes_manifest;
  std::string crops_manifest;
  int n_train = 0, n_val = 0, n_test = 0;
  int night_count = 0;
};

/// Writes scenes/, crops/ and the two manifests under out_dir. Fully
/// reproducible from (seed, config) for any thread count: every record draws
/// from its own derived stream.
GenResult generate_dataset(const GenConfig& cfg);

}  // namespace platekit
