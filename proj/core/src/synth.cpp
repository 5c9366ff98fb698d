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

#include "platekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "platekit/thread.hpp"

namespace fs = std::filesystem;

namespace platekit {

namespace {
const std::string kDigits = "0123456789";
const std::string kLetters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
}  // namespace

// ---------------------------------------------------------------------------
// Grammar
// ---------------------------------------------------------------------------

void LayoutGrammar::validate(const Alphabet& alphabet) const {
  if (positions() < 2) throw ConfigError("grammar '" + name + "': needs at least 2 positions");
  for (const std::string& cls : position_classes) {
    if (cls.empty()) throw ConfigError("grammar '" + name + "': empty position class");
    for (char c : cls)
      if (!alphabet.contains(c))
        throw ConfigError("grammar '" + name + "': symbol '" + std::string(1, c) +
                          "' not in alphabet");
  }
  if (aspect <= 0) throw ConfigError("grammar '" + name + "': aspect must be positive");
  if (spacing < 0) throw ConfigError("grammar '" + name + "': spacing must be >= 0");
}

bool LayoutGrammar::conforms(const std::string& s) const {
  if (static_cast<int>(s.size()) != positions()) return false;
  for (size_t i = 0; i < s.size(); ++i)
    if (position_classes[i].find(s[i]) == std::string::npos) return false;
  return true;
}

LayoutGrammar builtin_grammar(const std::string& name) {
  LayoutGrammar g;
  g.name = name;
  if (name == "ir-like") {
    // two digits, a letter, three digits, two-digit region pair
    g.position_classes = {kDigits, kDigits, kLetters, kDigits, kDigits, kDigits, kDigits, kDigits};
    g.aspect = 4.5;
    g.bg = {0.93f, 0.93f, 0.93f};
    g.fg = {0.08f, 0.08f, 0.08f};
  } else if (name == "br-like") {
    g.position_classes = {kLetters, kLetters, kLetters, kDigits, kDigits, kDigits, kDigits};
    g.aspect = 3.1;
    g.bg = {0.85f, 0.86f, 0.88f};
    g.fg = {0.05f, 0.05f, 0.05f};
  } else if (name == "tw-like") {
    g.position_classes = {kLetters, kLetters, kDigits, kDigits, kDigits, kDigits};
    g.aspect = 2.4;
    g.bg = {0.95f, 0.95f, 0.92f};
    g.fg = {0.1f, 0.1f, 0.1f};
  } else if (name == "ambiguous") {
    // lookalike-heavy classes at letter-only / digit-only slots
    const std::string conf_letters = "BOIG";
    const std::string conf_digits = "8016";
    g.position_classes = {conf_letters, conf_letters, conf_digits,
                          conf_digits,  conf_digits,  conf_letters};
    g.aspect = 3.0;
    g.bg = {0.9f, 0.9f, 0.9f};
    g.fg = {0.06f, 0.06f, 0.06f};
  } else {
    throw ConfigError("unknown built-in grammar '" + name + "'");
  }
  return g;
}

LayoutGrammar parse_grammar_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grammar file: " + path);
  LayoutGrammar g;
  g.name = fs::path(path).stem().string();
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(path + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string eq;
    if (!(ls >> eq) || eq != "=") fail("expected '<key> = <value>'");
    if (key == "name") {
      ls >> g.name;
    } else if (key == "positions") {
      g.position_classes.clear();
      std::string tok;
      while (ls >> tok) {
        if (tok == "D") {
          g.position_classes.push_back(kDigits);
        } else if (tok == "L") {
          g.position_classes.push_back(kLetters);
        } else if (tok.size() >= 3 && tok.front() == '{' && tok.back() == '}') {
          std::string cls;
          for (char c : tok.substr(1, tok.size() - 2))
            if (c != ',') cls.push_back(c);
          if (cls.empty()) fail("empty explicit class");
          g.position_classes.push_back(cls);
        } else {
          fail("bad position token '" + tok + "'");
        }
      }
    } else if (key == "aspect") {
      if (!(ls >> g.aspect)) fail("bad aspect");
    } else if (key == "spacing") {
      if (!(ls >> g.spacing)) fail("bad spacing");
    } else if (key == "atlas") {
      ls >> g.atlas;
    } else if (key == "fg" || key == "bg") {
      std::string rgb;
      ls >> rgb;
      int r, gg, b;
      if (std::sscanf(rgb.c_str(), "%d,%d,%d", &r, &gg, &b) != 3) fail("bad color '" + rgb + "'");
      std::array<float, 3> col{r / 255.f, gg / 255.f, b / 255.f};
      (key == "fg" ? g.fg : g.bg) = col;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (g.position_classes.empty()) throw ConfigError(path + ": grammar has no positions");
  return g;
}

LayoutGrammar resolve_grammar(const std::string& ref) {
  if (ref == "ir-like" || ref == "br-like" || ref == "tw-like" || ref == "ambiguous")
    return builtin_grammar(ref);
  return parse_grammar_file(ref);
}

void AugmentationConfig::validate() const {
  if (rot_deg < 0 || persp < 0 || noise < 0) throw ConfigError("augment: magnitudes must be >= 0");
  if (blur_min < 0 || blur_max < blur_min) throw ConfigError("augment: bad blur range");
  if (bright_min <= 0 || bright_max < bright_min) throw ConfigError("augment: bad brightness range");
}

// ---------------------------------------------------------------------------
// Sampling and rendering
// ---------------------------------------------------------------------------

std::string sample_plate_string(const LayoutGrammar& grammar, Rng& rng) {
  std::string out;
  out.reserve(static_cast<size_t>(grammar.positions()));
  for (const std::string& cls : grammar.position_classes)
    out.push_back(cls[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(cls.size()) - 1))]);
  return out;
}

std::vector<CellRect> plate_layout(const LayoutGrammar& grammar, const GlyphAtlas& atlas,
                                   int out_h, int out_w, int n_chars) {
  const int margin = 3;
  const int avail_w = out_w - 2 * margin;
  const int avail_h = out_h - 2 * margin;
  int scale = std::min(avail_h / atlas.gh,
                       avail_w / (n_chars * atlas.gw + (n_chars - 1) * grammar.spacing));
  if (scale < 1)
    throw ValueError("plate_layout: " + std::to_string(n_chars) + " glyphs do not fit in " +
                     std::to_string(out_w) + "x" + std::to_string(out_h));
  const int total_w = scale * (n_chars * atlas.gw + (n_chars - 1) * grammar.spacing);
  const int x0 = (out_w - total_w) / 2;
  const int y0 = (out_h - scale * atlas.gh) / 2;
  std::vector<CellRect> cells;
  cells.reserve(static_cast<size_t>(n_chars));
  for (int i = 0; i < n_chars; ++i) {
    CellRect r;
    r.x = x0 + i * scale * (atlas.gw + grammar.spacing);
    r.y = y0;
    r.w = scale * atlas.gw;
    r.h = scale * atlas.gh;
    r.scale = scale;
    cells.push_back(r);
  }
  return cells;
}

Image render_plate(const std::string& s, const LayoutGrammar& grammar, const GlyphAtlas& atlas,
                   int out_h, int out_w) {
  if (!grammar.conforms(s))
    throw ValueError("string '" + s + "' does not conform to grammar '" + grammar.name + "'");
  Image img(out_h, out_w, 3);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = grammar.bg[static_cast<size_t>(c)];
  // thin frame
  for (int x = 0; x < out_w; ++x)
    for (int c = 0; c < 3; ++c) {
      img.at(0, x, c) = grammar.fg[static_cast<size_t>(c)];
      img.at(out_h - 1, x, c) = grammar.fg[static_cast<size_t>(c)];
    }
  for (int y = 0; y < out_h; ++y)
    for (int c = 0; c < 3; ++c) {
      img.at(y, 0, c) = grammar.fg[static_cast<size_t>(c)];
      img.at(y, out_w - 1, c) = grammar.fg[static_cast<size_t>(c)];
    }

  const std::vector<CellRect> cells =
      plate_layout(grammar, atlas, out_h, out_w, static_cast<int>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) {
    const int glyph = atlas.index_of(s[i]);
    const CellRect& cell = cells[i];
    for (int gy = 0; gy < atlas.gh; ++gy)
      for (int gx = 0; gx < atlas.gw; ++gx) {
        if (!atlas.pixel(glyph, gy, gx)) continue;
        for (int sy = 0; sy < cell.scale; ++sy)
          for (int sx = 0; sx < cell.scale; ++sx) {
            const int py = cell.y + gy * cell.scale + sy;
            const int px = cell.x + gx * cell.scale + sx;
            for (int c = 0; c < 3; ++c) img.at(py, px, c) = grammar.fg[static_cast<size_t>(c)];
          }
      }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

namespace {

Image rotate_bilinear(const Image& img, double deg) {
  const double rad = deg * M_PI / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double cy = (img.h - 1) / 2.0, cx = (img.w - 1) / 2.0;
  Image out(img.h, img.w, img.c);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      // inverse map: rotate output coords by -deg around the center
      const double dy = y - cy, dx = x - cx;
      const float sy = static_cast<float>(cy + dy * cs - dx * sn);
      const float sx = static_cast<float>(cx + dy * sn + dx * cs);
      for (int c = 0; c < img.c; ++c) out.at(y, x, c) = img.sample(sy, sx, c);
    }
  return out;
}

/// Solves the 8-unknown homography H mapping each dst corner to its src
/// corner, by Gaussian elimination with partial pivoting.
std::array<double, 9> solve_homography(const std::array<std::array<double, 2>, 4>& dst,
                                       const std::array<std::array<double, 2>, 4>& src) {
  double m[8][9] = {};
  for (int i = 0; i < 4; ++i) {
    const double x = dst[static_cast<size_t>(i)][0], y = dst[static_cast<size_t>(i)][1];
    const double u = src[static_cast<size_t>(i)][0], v = src[static_cast<size_t>(i)][1];
    double* r0 = m[2 * i];
    double* r1 = m[2 * i + 1];
    r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -x * u; r0[7] = -y * u; r0[8] = u;
    r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -x * v; r1[7] = -y * v; r1[8] = v;
  }
  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-12) throw ValueError("degenerate perspective corners");
    if (pivot != col)
      for (int c = 0; c < 9; ++c) std::swap(m[pivot][c], m[col][c]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 9; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::array<double, 9> h{};
  for (int i = 0; i < 8; ++i) h[static_cast<size_t>(i)] = m[i][8] / m[i][i];
  h[8] = 1.0;
  return h;
}

Image perspective_jitter(const Image& img, double mag, Rng& rng) {
  const double jw = mag * img.w, jh = mag * img.h;
  std::array<std::array<double, 2>, 4> dst{{{0, 0},
                                            {static_cast<double>(img.w - 1), 0},
                                            {static_cast<double>(img.w - 1),
                                             static_cast<double>(img.h - 1)},
                                            {0, static_cast<double>(img.h - 1)}}};
  std::array<std::array<double, 2>, 4> src = dst;
  for (auto& corner : src) {
    corner[0] += rng.uniform(-jw, jw);
    corner[1] += rng.uniform(-jh, jh);
  }
  const std::array<double, 9> h = solve_homography(dst, src);
  Image out(img.h, img.w, img.c);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      const double wz = h[6] * x + h[7] * y + h[8];
      const float sx = static_cast<float>((h[0] * x + h[1] * y + h[2]) / wz);
      const float sy = static_cast<float>((h[3] * x + h[4] * y + h[5]) / wz);
      for (int c = 0; c < img.c; ++c) out.at(y, x, c) = img.sample(sy, sx, c);
    }
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(static_cast<size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[static_cast<size_t>(i + radius)] = static_cast<float>(v);
    sum += v;
  }
  for (float& v : kernel) v = static_cast<float>(v / sum);

  Image tmp(img.h, img.w, img.c);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < img.c; ++c) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const int xx = std::clamp(x + i, 0, img.w - 1);
          acc += kernel[static_cast<size_t>(i + radius)] * img.at(y, xx, c);
        }
        tmp.at(y, x, c) = acc;
      }
  Image out(img.h, img.w, img.c);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < img.c; ++c) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const int yy = std::clamp(y + i, 0, img.h - 1);
          acc += kernel[static_cast<size_t>(i + radius)] * tmp.at(yy, x, c);
        }
        out.at(y, x, c) = acc;
      }
  return out;
}

}  // namespace

Image augment(const Image& img, const AugmentationConfig& cfg, Rng& rng) {
  cfg.validate();
  Image out = img;
  if (cfg.rot_deg > 0) out = rotate_bilinear(out, rng.uniform(-cfg.rot_deg, cfg.rot_deg));
  if (cfg.persp > 0) out = perspective_jitter(out, cfg.persp, rng);
  const double sigma = cfg.blur_max > 0 ? rng.uniform(cfg.blur_min, cfg.blur_max) : 0.0;
  if (sigma > 0.05) out = gaussian_blur(out, sigma);
  const double bright = cfg.night ? rng.uniform(0.15, 0.4)
                                  : rng.uniform(cfg.bright_min, cfg.bright_max);
  if (bright != 1.0)
    for (float& v : out.px) v = static_cast<float>(v * bright);
  const double noise = cfg.night ? std::max(cfg.noise, 0.05) : cfg.noise;
  if (noise > 0)
    for (float& v : out.px)
      v = std::clamp(v + static_cast<float>(rng.normal(0.0, noise)), 0.f, 1.f);
  return out;
}

Image rotate_image(const Image& img, double degrees) { return rotate_bilinear(img, degrees); }

// ---------------------------------------------------------------------------
// Scene composition
// ---------------------------------------------------------------------------

ComposedScene compose_scene(const Image& plate, Rng& rng, const SceneConfig& cfg) {
  const int s = cfg.size;
  Image scene(s, s, 3);
  const float dim = static_cast<float>(cfg.background_dim);

  // vertical gradient between two random muted colors
  std::array<float, 3> top, bot;
  for (int c = 0; c < 3; ++c) {
    top[static_cast<size_t>(c)] = static_cast<float>(rng.uniform(0.15, 0.65)) * dim;
    bot[static_cast<size_t>(c)] = static_cast<float>(rng.uniform(0.15, 0.65)) * dim;
  }
  for (int y = 0; y < s; ++y) {
    const float t = static_cast<float>(y) / static_cast<float>(s - 1);
    for (int x = 0; x < s; ++x)
      for (int c = 0; c < 3; ++c)
        scene.at(y, x, c) = top[static_cast<size_t>(c)] * (1 - t) + bot[static_cast<size_t>(c)] * t;
  }

  // distractor rectangles (no glyph texture)
  const int nrect = static_cast<int>(rng.uniform_int(0, cfg.max_distractors));
  for (int r = 0; r < nrect; ++r) {
    const int rw = static_cast<int>(rng.uniform(0.1, 0.45) * s);
    const int rh = static_cast<int>(rng.uniform(0.08, 0.35) * s);
    const int rx = static_cast<int>(rng.uniform_int(0, std::max(0, s - rw - 1)));
    const int ry = static_cast<int>(rng.uniform_int(0, std::max(0, s - rh - 1)));
    std::array<float, 3> col;
    for (int c = 0; c < 3; ++c) col[static_cast<size_t>(c)] = static_cast<float>(rng.uniform(0.1, 0.9)) * dim;
    const bool border = rng.chance(0.5);
    for (int y = ry; y < ry + rh && y < s; ++y)
      for (int x = rx; x < rx + rw && x < s; ++x) {
        const bool edge = (y == ry || y == ry + rh - 1 || x == rx || x == rx + rw - 1);
        for (int c = 0; c < 3; ++c)
          scene.at(y, x, c) = (border && edge) ? 0.05f : col[static_cast<size_t>(c)];
      }
  }

  // pick a paste rect preserving the rendered crop's aspect
  const double crop_aspect = static_cast<double>(plate.w) / plate.h;
  int pw = 0, ph = 0, px = 0, py = 0;
  bool placed = false;
  for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
    const double frac = rng.uniform(cfg.plate_min, cfg.plate_max);
    pw = std::max(8, static_cast<int>(std::lround(frac * s)));
    ph = std::max(4, static_cast<int>(std::lround(pw / crop_aspect)));
    if (pw > s || ph > s) continue;
    px = static_cast<int>(rng.uniform_int(0, s - pw));
    py = static_cast<int>(rng.uniform_int(0, s - ph));
    placed = true;
    break;
  }
  if (!placed) throw ValueError("compose_scene: plate does not fit after retries");

  const Image scaled = resize_bilinear(plate, ph, pw);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x)
      for (int c = 0; c < 3; ++c) scene.at(py + y, px + x, c) = scaled.at(y, x, c);

  // light shared sensor noise
  for (float& v : scene.px)
    v = std::clamp(v + static_cast<float>(rng.normal(0.0, 0.01)), 0.f, 1.f);

  ComposedScene out;
  out.scene = std::move(scene);
  out.box.x = (px + pw / 2.0) / s;
  out.box.y = (py + ph / 2.0) / s;
  out.box.w = static_cast<double>(pw) / s;
  out.box.h = static_cast<double>(ph) / s;
  return out;
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

void GenConfig::validate() const {
  if (n <= 0) throw ConfigError("gen: n must be positive");
  const double total = frac_train + frac_val + frac_test;
  if (frac_train < 0 || frac_val < 0 || frac_test < 0 || std::abs(total - 1.0) > 1e-9)
    throw ConfigError("gen: split fractions must be nonnegative and sum to 1");
  if (night_fraction < 0 || night_fraction > 1)
    throw ConfigError("gen: night_fraction must lie in [0,1]");
  if (plate_h < 16 || plate_w < 16) throw ConfigError("gen: plate resolution too small");
  if (out_dir.empty()) throw ConfigError("gen: out_dir missing");
  aug.validate();
  grammar.validate(Alphabet());
}

GenResult generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  const GlyphAtlas atlas = load_atlas(cfg.grammar.atlas);
  // every glyph the grammar can draw must fit the crop resolution
  plate_layout(cfg.grammar, atlas, cfg.plate_h, cfg.plate_w, cfg.grammar.positions());

  const fs::path root(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(root / "scenes", ec);
  fs::create_directories(root / "crops", ec);
  if (!fs::exists(root / "scenes") || !fs::exists(root / "crops"))
    throw IoError("gen: cannot create output directories under " + cfg.out_dir);

  const int n_train = static_cast<int>(std::lround(cfg.n * cfg.frac_train));
  const int n_val = static_cast<int>(std::lround(cfg.n * cfg.frac_val));

  std::vector<ManifestRecord> scene_recs(static_cast<size_t>(cfg.n));
  std::vector<ManifestRecord> crop_recs(static_cast<size_t>(cfg.n));
  std::vector<uint8_t> night_flags(static_cast<size_t>(cfg.n), 0);

  parallel_for(cfg.n, cfg.threads, [&](int64_t i) {
    Rng rng = Rng::derived(cfg.seed, /*stream=*/0, static_cast<uint64_t>(i));
    const bool night = rng.chance(cfg.night_fraction) || cfg.aug.night;
    night_flags[static_cast<size_t>(i)] = night ? 1 : 0;

    const std::string text = sample_plate_string(cfg.grammar, rng);
    const Image clean = render_plate(text, cfg.grammar, atlas, cfg.plate_h, cfg.plate_w);
    AugmentationConfig aug = cfg.aug;
    aug.night = night;
    const Image plate = augment(clean, aug, rng);

    SceneConfig sc = cfg.scene;
    if (night) sc.background_dim = rng.uniform(0.2, 0.5);
    ComposedScene composed = compose_scene(plate, rng, sc);

    char name[64];
    std::snprintf(name, sizeof(name), "scenes/scene_%06lld.ppm", static_cast<long long>(i));
    write_pnm((root / name).string(), composed.scene);
    ManifestRecord& srec = scene_recs[static_cast<size_t>(i)];
    srec.image = name;
    srec.boxes = {composed.box};
    srec.strings = {text};

    std::snprintf(name, sizeof(name), "crops/crop_%06lld.ppm", static_cast<long long>(i));
    write_pnm((root / name).string(), plate);
    ManifestRecord& crec = crop_recs[static_cast<size_t>(i)];
    crec.image = name;
    crec.boxes = {BBox{0.5, 0.5, 1.0, 1.0}};
    crec.strings = {text};
  });

  GenResult result;
  for (int i = 0; i < cfg.n; ++i) {
    const std::string split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    std::vector<std::string> tags{cfg.grammar.name};
    if (night_flags[static_cast<size_t>(i)]) {
      tags.push_back("night");
      ++result.night_count;
    }
    scene_recs[static_cast<size_t>(i)].split = split;
    scene_recs[static_cast<size_t>(i)].tags = tags;
    crop_recs[static_cast<size_t>(i)].split = split;
    crop_recs[static_cast<size_t>(i)].tags = tags;
  }
  result.n_train = n_train;
  result.n_val = n_val;
  result.n_test = cfg.n - n_train - n_val;

  result.scenes_manifest = (root / "scenes.manifest").string();
  result.crops_manifest = (root / "crops.manifest").string();
  write_manifest(result.scenes_manifest, scene_recs);
  write_manifest(result.crops_manifest, crop_recs);
  return result;
}

}  // namespace platekit
