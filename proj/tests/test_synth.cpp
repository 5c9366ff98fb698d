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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>

#include "platekit/synth.hpp"

using namespace platekit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("platekit_synth_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

/// Per-cell nearest-glyph template matcher: knows the grammar geometry and
/// the atlas, nothing about any model.
std::string template_decode(const Image& plate, const LayoutGrammar& grammar,
                            const GlyphAtlas& atlas, int n_chars) {
  const auto cells = plate_layout(grammar, atlas, plate.h, plate.w, n_chars);
  std::string out;
  for (const CellRect& cell : cells) {
    double best = 1e30;
    char best_c = '?';
    for (char cand : atlas.order) {
      const int glyph = atlas.index_of(cand);
      double ssd = 0;
      for (int gy = 0; gy < atlas.gh; ++gy)
        for (int gx = 0; gx < atlas.gw; ++gx) {
          const bool on = atlas.pixel(glyph, gy, gx);
          for (int sy = 0; sy < cell.scale; ++sy)
            for (int sx = 0; sx < cell.scale; ++sx) {
              const int py = cell.y + gy * cell.scale + sy;
              const int px = cell.x + gx * cell.scale + sx;
              for (int ch = 0; ch < 3; ++ch) {
                const float expect = on ? grammar.fg[static_cast<size_t>(ch)]
                                        : grammar.bg[static_cast<size_t>(ch)];
                const double d = plate.at(py, px, ch) - expect;
                ssd += d * d;
              }
            }
        }
      if (ssd < best) {
        best = ssd;
        best_c = cand;
      }
    }
    out.push_back(best_c);
  }
  return out;
}

}  // namespace

TEST_CASE("sample_plate_string obeys the grammar") {
  Rng rng(5);
  LayoutGrammar g;
  g.name = "digits3";
  g.position_classes = {"0123456789", "0123456789", "0123456789"};
  const std::regex re("[0-9]{3}");
  for (int i = 0; i < 200; ++i) CHECK(std::regex_match(sample_plate_string(g, rng), re));

  // single-symbol classes are deterministic
  LayoutGrammar fixed;
  fixed.name = "fixed";
  fixed.position_classes = {"A", "B", "7"};
  CHECK(sample_plate_string(fixed, rng) == "AB7");
}

TEST_CASE("per-position draw is uniform (chi-square, 3 sigma)") {
  Rng rng(99);
  const LayoutGrammar g = builtin_grammar("br-like");  // L L L D D D D
  const int n = 10000;
  std::vector<std::map<char, int>> counts(static_cast<size_t>(g.positions()));
  for (int i = 0; i < n; ++i) {
    const std::string s = sample_plate_string(g, rng);
    for (size_t p = 0; p < s.size(); ++p) ++counts[p][s[p]];
  }
  for (int p = 0; p < g.positions(); ++p) {
    const std::string& cls = g.position_classes[static_cast<size_t>(p)];
    const double expect = static_cast<double>(n) / static_cast<double>(cls.size());
    double chi2 = 0;
    for (char c : cls) {
      const double obs = counts[static_cast<size_t>(p)][c];
      chi2 += (obs - expect) * (obs - expect) / expect;
    }
    // chi-square mean df, sd sqrt(2 df); 3-sigma acceptance band
    const double df = static_cast<double>(cls.size()) - 1;
    CHECK(chi2 < df + 3.0 * std::sqrt(2.0 * df));
  }
}

TEST_CASE("render_plate contract") {
  const LayoutGrammar g = builtin_grammar("br-like");
  const GlyphAtlas& atlas = builtin_atlas();
  const Image a = render_plate("ABC1234", g, atlas, 32, 96);
  CHECK(a.h == 32);
  CHECK(a.w == 96);
  CHECK(a.c == 3);

  // deterministic
  const Image b = render_plate("ABC1234", g, atlas, 32, 96);
  for (size_t i = 0; i < a.px.size(); ++i) CHECK(a.px[i] == b.px[i]);

  // non-conforming strings are rejected
  CHECK_THROWS_AS(render_plate("1BC1234", g, atlas, 32, 96), ValueError);  // digit at letter slot
  CHECK_THROWS_AS(render_plate("ABC123", g, atlas, 32, 96), ValueError);   // wrong length
}

TEST_CASE("template-matching oracle reads every unaugmented render exactly") {
  const GlyphAtlas& atlas = builtin_atlas();
  for (const char* name : {"ir-like", "br-like", "tw-like", "ambiguous"}) {
    const LayoutGrammar g = builtin_grammar(name);
    Rng rng(7);
    for (int i = 0; i < 25; ++i) {
      const std::string s = sample_plate_string(g, rng);
      const Image plate = render_plate(s, g, atlas, 32, 96);
      CHECK(template_decode(plate, g, atlas, g.positions()) == s);
    }
  }
}

TEST_CASE("glyphs are pairwise distinct") {
  const GlyphAtlas& atlas = builtin_atlas();
  for (size_t a = 0; a < atlas.order.size(); ++a)
    for (size_t b = a + 1; b < atlas.order.size(); ++b) {
      int diff = 0;
      for (int y = 0; y < atlas.gh; ++y)
        for (int x = 0; x < atlas.gw; ++x)
          if (atlas.pixel(static_cast<int>(a), y, x) != atlas.pixel(static_cast<int>(b), y, x))
            ++diff;
      CHECK(diff > 0);
    }
}

TEST_CASE("augment identity and photometric stages") {
  const Image plate =
      render_plate("ABC1234", builtin_grammar("br-like"), builtin_atlas(), 32, 96);

  // all-zero magnitudes: exact identity
  AugmentationConfig none;
  Rng rng(3);
  const Image same = augment(plate, none, rng);
  for (size_t i = 0; i < plate.px.size(); ++i) CHECK(same.px[i] == plate.px[i]);

  // brightness 0.5 on a constant image, no noise: constant 0.5c
  AugmentationConfig half;
  half.bright_min = half.bright_max = 0.5;
  const Image c(8, 8, 3, 0.8f);
  const Image dimmed = augment(c, half, rng);
  for (const float& v : dimmed.px) CHECK(v == doctest::Approx(0.4f).epsilon(1e-6));

  // night flag forces brightness into [0.15, 0.4] and a noise floor
  AugmentationConfig night;
  night.night = true;
  const Image bright(16, 16, 3, 1.0f);
  const Image dark = augment(bright, night, rng);
  double mean = 0;
  for (const float& v : dark.px) mean += v;
  mean /= static_cast<double>(dark.px.size());
  CHECK(mean > 0.10);
  CHECK(mean < 0.45);

  AugmentationConfig bad;
  bad.blur_min = 2.0;
  bad.blur_max = 1.0;
  CHECK_THROWS_AS(augment(plate, bad, rng), ConfigError);
}

TEST_CASE("rotation round trip within interpolation tolerance") {
  auto interior_mae = [](const Image& a, const Image& b) {
    double mae = 0;
    int count = 0;
    for (int y = 6; y < a.h - 6; ++y)
      for (int x = 12; x < a.w - 12; ++x)
        for (int ch = 0; ch < a.c; ++ch) {
          mae += std::abs(a.at(y, x, ch) - b.at(y, x, ch));
          ++count;
        }
    return mae / count;
  };

  // smooth content: double bilinear resampling is nearly lossless
  Image smooth(32, 96, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 96; ++x)
      for (int ch = 0; ch < 3; ++ch)
        smooth.at(y, x, ch) = 0.2f + 0.6f * (static_cast<float>(x) / 95.f) * (ch + 1) / 3.f;
  CHECK(interior_mae(rotate_image(rotate_image(smooth, 7.0), -7.0), smooth) < 0.012);

  // hard-edged glyphs blur at their boundaries; measured round-trip MAE at
  // 7 degrees is ~0.078, frozen here with headroom
  const Image plate =
      render_plate("ABC1234", builtin_grammar("br-like"), builtin_atlas(), 32, 96);
  CHECK(interior_mae(rotate_image(rotate_image(plate, 7.0), -7.0), plate) < 0.10);
}

TEST_CASE("compose_scene invariants") {
  Rng rng(11);
  const Image plate =
      render_plate("ABC1234", builtin_grammar("br-like"), builtin_atlas(), 32, 96);
  SceneConfig cfg;
  cfg.size = 160;

  for (int i = 0; i < 10; ++i) {
    const ComposedScene composed = compose_scene(plate, rng, cfg);
    const BBox& b = composed.box;
    CHECK(b.valid());
    // fully inside the image
    CHECK(b.x - b.w / 2 >= -1e-9);
    CHECK(b.x + b.w / 2 <= 1 + 1e-9);
    CHECK(b.y - b.h / 2 >= -1e-9);
    CHECK(b.y + b.h / 2 <= 1 + 1e-9);

    // self-consistency: the scene crop at the box matches the rescaled plate
    const int px = static_cast<int>(std::lround((b.x - b.w / 2) * cfg.size));
    const int py = static_cast<int>(std::lround((b.y - b.h / 2) * cfg.size));
    const int pw = static_cast<int>(std::lround(b.w * cfg.size));
    const int ph = static_cast<int>(std::lround(b.h * cfg.size));
    const Image cropped = crop(composed.scene, px, py, pw, ph);
    const Image rescaled = resize_bilinear(plate, ph, pw);
    double mae = 0;
    for (size_t k = 0; k < cropped.px.size(); ++k)
      mae += std::abs(cropped.px[k] - rescaled.px[k]);
    mae /= static_cast<double>(cropped.px.size());
    CHECK(mae < 0.05);  // paste noise is sigma 0.01
  }

  // a square plate can fill the whole scene
  SceneConfig full;
  full.size = 64;
  full.plate_min = full.plate_max = 1.0;
  full.max_distractors = 0;
  const Image square(48, 48, 3, 0.5f);
  const ComposedScene whole = compose_scene(square, rng, full);
  CHECK(whole.box.x == doctest::Approx(0.5));
  CHECK(whole.box.y == doctest::Approx(0.5));
  CHECK(whole.box.w == doctest::Approx(1.0));
  CHECK(whole.box.h == doctest::Approx(1.0));
}

TEST_CASE("generate_dataset splits, determinism, validation") {
  TempDir tmp;
  GenConfig cfg;
  cfg.n = 40;
  cfg.grammar = builtin_grammar("tw-like");
  cfg.frac_train = 0.7;
  cfg.frac_val = 0.15;
  cfg.frac_test = 0.15;
  cfg.night_fraction = 0.4;
  cfg.seed = 123;
  cfg.out_dir = (tmp.path / "d1").string();
  cfg.scene.size = 96;

  const GenResult r1 = generate_dataset(cfg);
  CHECK(r1.n_train == 28);
  CHECK(r1.n_val == 6);
  CHECK(r1.n_test == 6);

  const Manifest scenes = read_manifest(r1.scenes_manifest);
  CHECK(scenes.records.size() == 40);
  CHECK_NOTHROW(validate_manifest(scenes));
  const Manifest crops = read_manifest(r1.crops_manifest);
  CHECK_NOTHROW(validate_manifest(crops));

  int night_tagged = 0;
  for (const auto& rec : scenes.records)
    if (rec.has_tag("night")) ++night_tagged;
  CHECK(night_tagged == r1.night_count);
  CHECK(night_tagged > 0);

  // same seed -> byte-identical manifests
  cfg.out_dir = (tmp.path / "d2").string();
  const GenResult r2 = generate_dataset(cfg);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string m1 = slurp(r1.scenes_manifest), m2 = slurp(r2.scenes_manifest);
  CHECK(m1 == m2);

  // single-worker run produces identical bytes too
  cfg.out_dir = (tmp.path / "d3").string();
  cfg.threads = 1;
  const GenResult r3 = generate_dataset(cfg);
  CHECK(slurp(r3.scenes_manifest) == m1);
  CHECK(slurp((tmp.path / "d3/scenes/scene_000000.ppm").string()) ==
        slurp((tmp.path / "d1/scenes/scene_000000.ppm").string()));

  // invalid fractions fail before anything is written
  GenConfig bad = cfg;
  bad.frac_train = 0.9;  // sums to 1.2
  bad.out_dir = (tmp.path / "bad").string();
  CHECK_THROWS_AS(generate_dataset(bad), ConfigError);
  CHECK_FALSE(fs::exists(tmp.path / "bad"));
}

TEST_CASE("grammar files parse and validate") {
  TempDir tmp;
  const std::string path = (tmp.path / "my.grammar").string();
  std::ofstream(path) << R"(
name = my-layout
positions = L L {8,0,1} D
aspect = 3.5
fg = 20,20,20
bg = 235,235,235
spacing = 2
atlas = builtin:5x7
)";
  const LayoutGrammar g = parse_grammar_file(path);
  CHECK(g.name == "my-layout");
  CHECK(g.positions() == 4);
  CHECK(g.position_classes[2] == "801");
  CHECK(g.aspect == doctest::Approx(3.5));
  CHECK(g.spacing == 2);
  CHECK_NOTHROW(g.validate(Alphabet()));

  std::ofstream((tmp.path / "bad.grammar").string()) << "positions = L Q\n";
  CHECK_THROWS_AS(parse_grammar_file((tmp.path / "bad.grammar").string()), ConfigError);

  CHECK_THROWS_AS(builtin_grammar("nope"), ConfigError);
  CHECK(resolve_grammar("ambiguous").positions() == 6);
}
