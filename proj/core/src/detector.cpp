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

#include "platekit/detector.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace platekit {

void DetectorConfig::validate() const {
  if (grid < 1) throw ConfigError("detector: grid must be >= 1");
  if (boxes_per_cell < 1) throw ConfigError("detector: boxes_per_cell must be >= 1");
  if (conf_thresh < 0 || conf_thresh > 1 || nms_iou < 0 || nms_iou > 1)
    throw ConfigError("detector: thresholds must lie in [0,1]");
  if (widths.empty()) throw ConfigError("detector: need at least one backbone width");
  const int down = 1 << widths.size();
  if (input % down != 0 || input / down != grid)
    throw ConfigError("detector: input " + std::to_string(input) + " with " +
                      std::to_string(widths.size()) + " stride-2 stages does not yield a " +
                      std::to_string(grid) + "x" + std::to_string(grid) + " grid");
}

namespace {

double iou_ordered(const BBox& a, const BBox& b) {
  const double ax0 = a.x - a.w / 2, ax1 = a.x + a.w / 2;
  const double ay0 = a.y - a.h / 2, ay1 = a.y + a.h / 2;
  const double bx0 = b.x - b.w / 2, bx1 = b.x + b.w / 2;
  const double by0 = b.y - b.h / 2, by1 = b.y + b.h / 2;
  const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni <= 0 ? 0.0 : inter / uni;
}

}  // namespace

double iou(const BBox& a, const BBox& b) {
  // canonical operand order keeps the result bit-symmetric under FP
  // contraction (a*b+c fusing is not commutative in its rounding)
  const auto key = [](const BBox& box) { return std::tie(box.x, box.y, box.w, box.h); };
  return key(a) <= key(b) ? iou_ordered(a, b) : iou_ordered(b, a);
}

Tensor<float> encode_targets(const std::vector<BBox>& truths, const DetectorConfig& cfg,
                             int* dropped) {
  const int s = cfg.grid, b = cfg.boxes_per_cell;
  Tensor<float> grid({s, s, b * 5});
  if (dropped != nullptr) *dropped = 0;

  // group truths per cell
  std::vector<std::vector<BBox>> per_cell(static_cast<size_t>(s) * s);
  for (const BBox& box : truths) {
    if (!box.valid()) throw ValueError("encode_targets: invalid box");
    int cx = static_cast<int>(box.x * s);
    int cy = static_cast<int>(box.y * s);
    cx = std::min(cx, s - 1);  // x == 1.0 falls into the last cell
    cy = std::min(cy, s - 1);
    per_cell[static_cast<size_t>(cy) * s + cx].push_back(box);
  }

  for (int cy = 0; cy < s; ++cy) {
    for (int cx = 0; cx < s; ++cx) {
      auto& cell = per_cell[static_cast<size_t>(cy) * s + cx];
      if (cell.empty()) continue;
      std::stable_sort(cell.begin(), cell.end(),
                       [](const BBox& l, const BBox& r) { return l.w * l.h > r.w * r.h; });
      const int take = std::min<int>(b, static_cast<int>(cell.size()));
      if (dropped != nullptr) *dropped += static_cast<int>(cell.size()) - take;
      for (int slot = 0; slot < take; ++slot) {
        const BBox& box = cell[static_cast<size_t>(slot)];
        const double offx = box.x * s - cx;
        const double offy = box.y * s - cy;
        float* dst = grid.ptr() + ((static_cast<int64_t>(cy) * s + cx) * b + slot) * 5;
        dst[0] = static_cast<float>(offx);
        dst[1] = static_cast<float>(offy);
        dst[2] = static_cast<float>(box.w);
        dst[3] = static_cast<float>(box.h);
        dst[4] = 1.f;
      }
    }
  }
  return grid;
}

std::vector<Detection> decode_predictions(const Tensor<float>& grid, double conf_thresh,
                                          const DetectorConfig& cfg) {
  const int s = cfg.grid, b = cfg.boxes_per_cell;
  if (grid.ndim() != 3 || grid.dim(0) != s || grid.dim(1) != s || grid.dim(2) != b * 5)
    throw ShapeError("decode_predictions: grid shape " + shape_str(grid.shape()) +
                     " does not match config");
  std::vector<Detection> dets;
  for (int cy = 0; cy < s; ++cy)
    for (int cx = 0; cx < s; ++cx)
      for (int slot = 0; slot < b; ++slot) {
        const float* src = grid.ptr() + ((static_cast<int64_t>(cy) * s + cx) * b + slot) * 5;
        const double conf = src[4];
        if (conf < conf_thresh) continue;
        Detection d;
        d.box.x = (cx + static_cast<double>(src[0])) / s;
        d.box.y = (cy + static_cast<double>(src[1])) / s;
        d.box.w = src[2];
        d.box.h = src[3];
        d.confidence = conf;
        dets.push_back(d);
      }
  // row-major enumeration + stable sort = confidence order, ties by cell
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& l, const Detection& r) { return l.confidence > r.confidence; });
  return dets;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& l, const Detection& r) { return l.confidence > r.confidence; });
  std::vector<Detection> kept;
  for (const Detection& d : dets) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (iou(d.box, k.box) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// DetectorNet
// ---------------------------------------------------------------------------

DetectorNet::DetectorNet(const DetectorConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  int ci = cfg_.in_channels;
  for (int width : cfg_.widths) {
    trunk_.emplace_back(3, 3, ci, width, /*stride=*/2, /*pad=*/1, rng);
    ci = width;
  }
  mix_ = Conv2dLayer<float>(3, 3, ci, ci, 1, 1, rng);
  const int b = cfg_.boxes_per_cell;
  head_off_ = Conv2dLayer<float>(1, 1, ci, b * 2, 1, 0, rng);
  head_ext_ = Conv2dLayer<float>(1, 1, ci, b * 2, 1, 0, rng);
  head_obj_ = Conv2dLayer<float>(1, 1, ci, b, 1, 0, rng);
}

DetectorForward DetectorNet::forward(Graph<float>& g, Var<float> image) const {
  const auto& shape = image.shape();
  if (shape.size() != 3 || shape[0] != cfg_.input || shape[1] != cfg_.input ||
      shape[2] != cfg_.in_channels)
    throw ShapeError("detector: image shape " + shape_str(shape) + " does not match config input " +
                     std::to_string(cfg_.input));
  Var<float> x = image;
  for (const auto& conv : trunk_) x = gelu(conv(g, x));
  x = gelu(mix_(g, x));
  DetectorForward out;
  out.offsets = sigmoid(head_off_(g, x));
  out.extents = exp_(head_ext_(g, x));
  out.object = sigmoid(head_obj_(g, x));
  return out;
}

Tensor<float> pack_grid(const Tensor<float>& offsets, const Tensor<float>& extents,
                        const Tensor<float>& object, const DetectorConfig& cfg) {
  const int s = cfg.grid, b = cfg.boxes_per_cell;
  Tensor<float> grid({s, s, b * 5});
  for (int cy = 0; cy < s; ++cy)
    for (int cx = 0; cx < s; ++cx)
      for (int slot = 0; slot < b; ++slot) {
        float* dst = grid.ptr() + ((static_cast<int64_t>(cy) * s + cx) * b + slot) * 5;
        dst[0] = offsets.at(cy, cx, slot * 2 + 0);
        dst[1] = offsets.at(cy, cx, slot * 2 + 1);
        dst[2] = extents.at(cy, cx, slot * 2 + 0);
        dst[3] = extents.at(cy, cx, slot * 2 + 1);
        dst[4] = object.at(cy, cx, slot);
      }
  return grid;
}

Tensor<float> DetectorNet::predict_grid(const Tensor<float>& image) const {
  Graph<float> g(/*grad=*/false);
  DetectorForward f = forward(g, g.input(image));
  return pack_grid(f.offsets.value(), f.extents.value(), f.object.value(), cfg_);
}

void DetectorNet::params(ParamList<float>& out) {
  for (size_t i = 0; i < trunk_.size(); ++i)
    trunk_[i].params("det/trunk" + std::to_string(i), out);
  mix_.params("det/mix", out);
  head_off_.params("det/head_off", out);
  head_ext_.params("det/head_ext", out);
  head_obj_.params("det/head_obj", out);
}

int64_t DetectorNet::param_count() const {
  int64_t n = mix_.param_count() + head_off_.param_count() + head_ext_.param_count() +
              head_obj_.param_count();
  for (const auto& conv : trunk_) n += conv.param_count();
  return n;
}

int64_t DetectorNet::flops_per_image() const {
  // conv FLOPs: 2 * KH*KW*Ci*Co * OH*OW (one multiply + one add per MAC)
  int64_t total = 0;
  int res = cfg_.input;
  int ci = cfg_.in_channels;
  for (int width : cfg_.widths) {
    res /= 2;
    total += 2LL * 9 * ci * width * res * res;
    ci = width;
  }
  total += 2LL * 9 * ci * ci * res * res;                          // mix
  total += 2LL * ci * (cfg_.boxes_per_cell * 5) * res * res;       // heads
  return total;
}

Var<float> detection_loss(Graph<float>& g, const DetectorForward& fwd, const Tensor<float>& target,
                          const DetectorConfig& cfg, const Tensor<float>* obj_target_override) {
  const int s = cfg.grid, b = cfg.boxes_per_cell;
  if (target.ndim() != 3 || target.dim(0) != s || target.dim(1) != s || target.dim(2) != b * 5)
    throw ShapeError("detection_loss: target shape " + shape_str(target.shape()));

  // masks and objectness targets built from the target grid and the current
  // (detached) predictions
  Tensor<float> coord_mask({s, s, b * 2});
  Tensor<float> off_target({s, s, b * 2});
  Tensor<float> ext_target({s, s, b * 2});
  Tensor<float> obj_target({s, s, b});
  Tensor<float> obj_weight({s, s, b});

  const Tensor<float>& off = fwd.offsets.value();
  const Tensor<float>& ext = fwd.extents.value();

  for (int cy = 0; cy < s; ++cy)
    for (int cx = 0; cx < s; ++cx)
      for (int slot = 0; slot < b; ++slot) {
        const float* tgt = target.ptr() + ((static_cast<int64_t>(cy) * s + cx) * b + slot) * 5;
        const bool responsible = tgt[4] > 0.5f;
        if (responsible) {
          coord_mask.at(cy, cx, slot * 2 + 0) = 1.f;
          coord_mask.at(cy, cx, slot * 2 + 1) = 1.f;
          off_target.at(cy, cx, slot * 2 + 0) = tgt[0];
          off_target.at(cy, cx, slot * 2 + 1) = tgt[1];
          ext_target.at(cy, cx, slot * 2 + 0) = tgt[2];
          ext_target.at(cy, cx, slot * 2 + 1) = tgt[3];
          // objectness target = IoU(predicted box, truth box), detached
          BBox pred;
          pred.x = (cx + static_cast<double>(off.at(cy, cx, slot * 2 + 0))) / s;
          pred.y = (cy + static_cast<double>(off.at(cy, cx, slot * 2 + 1))) / s;
          pred.w = std::max(1e-6, static_cast<double>(ext.at(cy, cx, slot * 2 + 0)));
          pred.h = std::max(1e-6, static_cast<double>(ext.at(cy, cx, slot * 2 + 1)));
          BBox truth;
          truth.x = (cx + static_cast<double>(tgt[0])) / s;
          truth.y = (cy + static_cast<double>(tgt[1])) / s;
          truth.w = tgt[2];
          truth.h = tgt[3];
          pred.w = std::min(pred.w, 1.0);
          pred.h = std::min(pred.h, 1.0);
          obj_target.at(cy, cx, slot) = static_cast<float>(iou(pred, truth));
          obj_weight.at(cy, cx, slot) = 1.f;
        } else {
          obj_weight.at(cy, cx, slot) = static_cast<float>(cfg.noobj_weight);
        }
      }
  if (obj_target_override != nullptr) {
    if (!obj_target_override->same_shape(obj_target))
      throw ShapeError("detection_loss: obj target override shape " +
                       shape_str(obj_target_override->shape()));
    obj_target = *obj_target_override;
  }

  auto sq = [&](Var<float> v) { return mul(v, v); };
  Var<float> off_err = sq(sub(fwd.offsets, g.constant(off_target)));
  Var<float> ext_err = sq(sub(fwd.extents, g.constant(ext_target)));
  Var<float> coord = add(mul(off_err, g.constant(coord_mask)), mul(ext_err, g.constant(coord_mask)));
  Var<float> obj_err = mul(sq(sub(fwd.object, g.constant(obj_target))), g.constant(obj_weight));
  return add(scale(sum_all(coord), static_cast<float>(cfg.lambda_coord)), sum_all(obj_err));
}

}  // namespace platekit
