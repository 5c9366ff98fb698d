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

#include "platekit/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "platekit/errors.hpp"

namespace platekit {

float Image::sample(float y, float x, int ch) const {
  const float fy = std::clamp(y, 0.f, static_cast<float>(h - 1));
  const float fx = std::clamp(x, 0.f, static_cast<float>(w - 1));
  const int y0 = static_cast<int>(fy);
  const int x0 = static_cast<int>(fx);
  const int y1 = std::min(y0 + 1, h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const float dy = fy - static_cast<float>(y0);
  const float dx = fx - static_cast<float>(x0);
  const float top = at(y0, x0, ch) * (1.f - dx) + at(y0, x1, ch) * dx;
  const float bot = at(y1, x0, ch) * (1.f - dx) + at(y1, x1, ch) * dx;
  return top * (1.f - dy) + bot * dy;
}

namespace {

int read_pnm_token(std::istream& in) {
  // skips whitespace and '#' comments
  for (;;) {
    int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  in >> value;
  if (!in) throw IoError("malformed PNM header");
  return value;
}

}  // namespace

Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path);
  char p, kind;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '5' && kind != '6'))
    throw IoError("unsupported image format (want P5/P6): " + path);
  const int channels = kind == '5' ? 1 : 3;
  const int w = read_pnm_token(in);
  const int h = read_pnm_token(in);
  const int maxval = read_pnm_token(in);
  if (w <= 0 || h <= 0 || maxval != 255) throw IoError("unsupported PNM geometry/maxval: " + path);
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError("truncated image payload: " + path);
  Image img(h, w, channels);
  for (size_t i = 0; i < raw.size(); ++i) img.px[i] = static_cast<float>(raw[i]) / 255.f;
  return img;
}

void write_pnm(const std::string& path, const Image& img) {
  if (img.c != 1 && img.c != 3) throw IoError("write_pnm: image must have 1 or 3 channels");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image: " + path);
  out << (img.c == 1 ? "P5" : "P6") << "\n" << img.w << " " << img.h << "\n255\n";
  std::vector<unsigned char> raw(img.px.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    const float v = std::clamp(img.px[i], 0.f, 1.f);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.f));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("short write: " + path);
}

Image resize_bilinear(const Image& img, int oh, int ow) {
  if (oh <= 0 || ow <= 0) throw ValueError("resize_bilinear: non-positive target extents");
  Image out(oh, ow, img.c);
  const float sy = static_cast<float>(img.h) / static_cast<float>(oh);
  const float sx = static_cast<float>(img.w) / static_cast<float>(ow);
  for (int y = 0; y < oh; ++y) {
    const float iy = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
    for (int x = 0; x < ow; ++x) {
      const float ix = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
      for (int ch = 0; ch < img.c; ++ch) out.at(y, x, ch) = img.sample(iy, ix, ch);
    }
  }
  return out;
}

Image crop(const Image& img, int x0, int y0, int cw, int ch) {
  const int cx0 = std::clamp(x0, 0, img.w);
  const int cy0 = std::clamp(y0, 0, img.h);
  const int cx1 = std::clamp(x0 + cw, 0, img.w);
  const int cy1 = std::clamp(y0 + ch, 0, img.h);
  if (cx1 <= cx0 || cy1 <= cy0) throw ValueError("crop: empty region");
  Image out(cy1 - cy0, cx1 - cx0, img.c);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      for (int c = 0; c < img.c; ++c) out.at(y, x, c) = img.at(cy0 + y, cx0 + x, c);
  return out;
}

Tensor<float> image_to_tensor(const Image& img) {
  return Tensor<float>({img.h, img.w, img.c}, img.px);
}

Image tensor_to_image(const Tensor<float>& t) {
  if (t.ndim() != 3) throw ShapeError("tensor_to_image: want [H,W,C], got " + shape_str(t.shape()));
  Image img(t.dim(0), t.dim(1), t.dim(2));
  img.px = t.data();
  return img;
}

Image to_gray(const Image& img) {
  if (img.c == 1) return img;
  Image out(img.h, img.w, 1);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      out.at(y, x, 0) = 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) +
                        0.114f * img.at(y, x, 2);
  return out;
}

}  // namespace platekit
