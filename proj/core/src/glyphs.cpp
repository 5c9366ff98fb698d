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

#include "platekit/glyphs.hpp"

#include <array>

#include "platekit/errors.hpp"
#include "platekit/image.hpp"

namespace platekit {

namespace {

// 5x7 face, one row string per scanline. '#' = on.
// Lookalike pairs kept nearly identical on purpose: 0 is O plus a diagonal,
// B is 8 with a flat left edge, I is 1 with a serif top, G is a barred 6-ish C.
constexpr std::array<const char*, 36 * 7> kFace = {
    // 0
    ".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###.",
    // 1
    "..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###.",
    // 2
    ".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####",
    // 3
    ".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###.",
    // 4
    "...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#.",
    // 5
    "#####", "#....", "####.", "....#", "....#", "#...#", ".###.",
    // 6
    "..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###.",
    // 7
    "#####", "....#", "...#.", "...#.", "..#..", "..#..", "..#..",
    // 8
    ".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###.",
    // 9
    ".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##..",
    // A
    ".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#",
    // B
    "####.", "#...#", "#...#", "####.", "#...#", "#...#", "####.",
    // C
    ".###.", "#...#", "#....", "#....", "#....", "#...#", ".###.",
    // D
    "####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####.",
    // E
    "#####", "#....", "#....", "####.", "#....", "#....", "#####",
    // F
    "#####", "#....", "#....", "####.", "#....", "#....", "#....",
    // G
    ".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###.",
    // H
    "#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#",
    // I
    ".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.",
    // J
    "..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##..",
    // K
    "#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#",
    // L
    "#....", "#....", "#....", "#....", "#....", "#....", "#####",
    // M
    "#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#",
    // N
    "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#",
    // O
    ".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.",
    // P
    "####.", "#...#", "#...#", "####.", "#....", "#....", "#....",
    // Q
    ".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#",
    // R
    "####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#",
    // S
    ".####", "#....", "#....", ".###.", "....#", "....#", "####.",
    // T
    "#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#..",
    // U
    "#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.",
    // V
    "#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#..",
    // W
    "#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#",
    // X
    "#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#",
    // Y
    "#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#..",
    // Z
    "#####", "....#", "...#.", "..#..", ".#...", "#....", "#####",
};

GlyphAtlas make_builtin() {
  GlyphAtlas atlas;
  atlas.gw = 5;
  atlas.gh = 7;
  atlas.order = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  atlas.bits.resize(atlas.order.size() * 7 * 5);
  for (size_t g = 0; g < atlas.order.size(); ++g)
    for (int y = 0; y < 7; ++y) {
      const char* row = kFace[g * 7 + static_cast<size_t>(y)];
      for (int x = 0; x < 5; ++x)
        atlas.bits[(g * 7 + static_cast<size_t>(y)) * 5 + static_cast<size_t>(x)] =
            row[x] == '#' ? 1 : 0;
    }
  return atlas;
}

}  // namespace

int GlyphAtlas::index_of(char c) const {
  const size_t pos = order.find(c);
  if (pos == std::string::npos)
    throw ValueError(std::string("glyph atlas has no glyph for '") + c + "'");
  return static_cast<int>(pos);
}

const GlyphAtlas& builtin_atlas() {
  static const GlyphAtlas atlas = make_builtin();
  return atlas;
}

GlyphAtlas load_atlas(const std::string& ref) {
  if (ref == "builtin:5x7" || ref.empty()) return builtin_atlas();
  const Image strip = to_gray(read_pnm(ref));
  GlyphAtlas atlas;
  atlas.order = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  const int n = static_cast<int>(atlas.order.size());
  if (strip.w % n != 0)
    throw IoError("glyph strip width " + std::to_string(strip.w) + " is not a multiple of " +
                  std::to_string(n));
  atlas.gw = strip.w / n;
  atlas.gh = strip.h;
  atlas.bits.resize(static_cast<size_t>(n) * atlas.gh * atlas.gw);
  for (int g = 0; g < n; ++g)
    for (int y = 0; y < atlas.gh; ++y)
      for (int x = 0; x < atlas.gw; ++x)
        atlas.bits[(static_cast<size_t>(g) * atlas.gh + y) * atlas.gw + x] =
            strip.at(y, g * atlas.gw + x, 0) > 0.5f ? 1 : 0;
  return atlas;
}

}  // namespace platekit
