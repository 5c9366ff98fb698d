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

#include <cstdint>
#include <string>
#include <vector>

namespace platekit {

/// Bitmap glyph strip. Glyphs are gw x gh on/off masks laid out side by side
/// in `order`. The built-in atlas is a 5x7 face for 0-9A-Z whose lookalike
/// pairs (0/O, 8/B, 1/I, 6/G) differ in only a few pixels.
struct GlyphAtlas {
  int gw = 0, gh = 0;
  std::string order;
  std::vector<uint8_t> bits;  // order.size() * gh * gw, row-major per glyph

  bool pixel(int glyph, int y, int x) const {
    return bits[(static_cast<size_t>(glyph) * gh + y) * gw + x] != 0;
  }
  int index_of(char c) const;  // throws ValueError when the glyph is missing
};

/// The bundled 5x7 face ("builtin:5x7").
const GlyphAtlas& builtin_atlas();

/// Resolves an atlas reference: "builtin:5x7" or a path to a P5 strip whose
/// width is a multiple of its height * 5/7 layout — the strip must hold the
/// default 36-symbol order, glyph width = image width / 36, glyph height =
/// image height. Pixels > 50% gray count as on.
GlyphAtlas load_atlas(const std::string& ref);

}  // namespace platekit
