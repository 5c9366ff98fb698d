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

#include <string>
#include <vector>

#include "platekit/tensor.hpp"

namespace platekit {

/// Float image, row-major HWC, values in [0,1]. 1 channel (graymap) or 3
/// channels (pixmap).
struct Image {
  int h = 0, w = 0, c = 0;
  std::vector<float> px;

  Image() = default;
  Image(int height, int width, int channels, float fill = 0.f)
      : h(height), w(width), c(channels),
        px(static_cast<size_t>(height) * width * channels, fill) {}

  float& at(int y, int x, int ch) { return px[(static_cast<size_t>(y) * w + x) * c + ch]; }
  float at(int y, int x, int ch) const { return px[(static_cast<size_t>(y) * w + x) * c + ch]; }
  bool empty() const { return px.empty(); }

  /// Clamp-to-edge bilinear sample at fractional coordinates.
  float sample(float y, float x, int ch) const;
};

/// Reads a binary P5 (graymap) or P6 (pixmap) file with maxval 255.
Image read_pnm(const std::string& path);

/// Writes P5 for 1-channel images, P6 for 3-channel.
void write_pnm(const std::string& path, const Image& img);

Image resize_bilinear(const Image& img, int oh, int ow);

/// Pixel-rect crop; the rect is clamped to the image bounds.
Image crop(const Image& img, int x0, int y0, int cw, int ch);

Tensor<float> image_to_tensor(const Image& img);
Image tensor_to_image(const Tensor<float>& t);

/// Converts to a single luma channel (Rec.601 weights); identity on graymaps.
Image to_gray(const Image& img);

}  // namespace platekit
